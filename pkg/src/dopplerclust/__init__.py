"""Unsupervised clustering of micro-Doppler spectrograms.

Submodules: ``data``, ``features``, ``clustering``, ``validity``,
``evaluation``, ``manifold`` and the ``cli`` driver.
"""
from .clustering import ClusterModel, ClustererConfig, assign, kmeans_fit, kmedoids_fit
from .data import (
    Dataset,
    DatasetError,
    SpectrogramSample,
    SynthConfig,
    flatten_image,
    generate_synthetic,
    load_dataset,
    reshape_to_image,
    save_dataset,
)
from .evaluation import (
    ExperimentReport,
    FoldResult,
    accuracy_and_confusion,
    loocv_split,
    match_labels,
    run_experiment,
)
from .features import ExtractorConfig
from .manifold import Embedding, lle, mds, tsne
from .validity import KSweepReport, davies_bouldin, distortion, dunn, silhouette, sweep_k

__version__ = "0.1.0"
