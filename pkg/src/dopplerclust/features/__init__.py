from .dct import (
    PATCH_SIZES,
    DctPatchPlan,
    candidate_plans,
    dct2,
    extract_local_dct,
    extract_local_dct_batch,
    select_best_dct_patch,
    split_sizes,
    subpatch_bounds,
    zigzag_select,
)
from .entropy import (
    STRATEGIES,
    STRATEGY_GEOMETRY,
    EntropyStrategy,
    entropy,
    extract_entropy_batch,
    extract_entropy_features,
    select_best_entropy_strategy,
)
from .extractors import EXTRACTORS, ExtractorConfig, FittedExtractor
from .pca import (
    Pca2dModel,
    PcaModel,
    image_covariance,
    pca2d_fit,
    pca2d_project,
    pca2d_transform,
    pca_fit,
    pca_inverse,
    pca_transform,
)
