"""Named feature extractors with a fit-on-train / transform interface.

Fitting only ever sees the feature matrix; labels are not part of the
interface.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..clustering import ClustererConfig
from .dct import PATCH_SIZES, DctPatchPlan, extract_local_dct_batch, select_best_dct_patch
from .entropy import DEFAULT_BINS, EntropyStrategy, extract_entropy_batch, select_best_entropy_strategy
from .pca import DEFAULT_VARIANCE_TARGET, pca2d_fit, pca2d_transform, pca_fit, pca_transform

EXTRACTORS = ("local_dct", "raw_dct", "entropy", "pca", "pca2d", "raw")


@dataclass(frozen=True)
class ExtractorConfig:
    name: str = "local_dct"
    patch_sizes: tuple = PATCH_SIZES
    plan: tuple | None = None  # fixed (patch_size, patch_index), skips selection
    strategy: str | None = None  # fixed entropy strategy, skips selection
    bins: int = DEFAULT_BINS
    variance_target: float = DEFAULT_VARIANCE_TARGET

    def __post_init__(self):
        if self.name not in EXTRACTORS:
            raise ValueError(f"unknown extractor {self.name!r}; valid extractors: {', '.join(EXTRACTORS)}")
        object.__setattr__(self, "patch_sizes", tuple(int(s) for s in self.patch_sizes))
        if self.plan is not None:
            object.__setattr__(self, "plan", tuple(int(v) for v in self.plan))

    def to_dict(self):
        return {
            "name": self.name,
            "patch_sizes": list(self.patch_sizes),
            "plan": None if self.plan is None else list(self.plan),
            "strategy": self.strategy,
            "bins": self.bins,
            "variance_target": self.variance_target,
        }

    @property
    def needs_k(self):
        return (self.name == "local_dct" and self.plan is None) or (
            self.name == "entropy" and self.strategy is None
        )

    def fit(self, X, k=5, seed=0, selection_config=None):
        """Fit on an ``n x 6400`` training matrix and return a FittedExtractor."""
        X = np.asarray(X, dtype=np.float64)
        images = X.reshape(-1, 80, 80)
        sel = selection_config or ClustererConfig(method="kmeans", k=k)
        if sel.k != k or sel.method != "kmeans":
            sel = ClustererConfig("kmeans", k, sel.n_init, sel.max_iter, sel.tol)
        info = {"extractor": self.name}
        state = None
        if self.name == "local_dct":
            if self.plan is not None:
                state = DctPatchPlan(*self.plan)
            else:
                state, scores = select_best_dct_patch(images, self.patch_sizes, sel, seed, return_scores=True)
                info["dunn_scores"] = {f"{p.patch_size}x{p.patch_size}#{p.patch_index}": v for p, v in scores.items()}
            info["plan"] = state.to_dict()
        elif self.name == "raw_dct":
            state = DctPatchPlan(80, 0)
            info["plan"] = state.to_dict()
        elif self.name == "entropy":
            if self.strategy is not None:
                state = EntropyStrategy(self.strategy, self.bins)
            else:
                state, scores = select_best_entropy_strategy(images, sel, seed, self.bins, return_scores=True)
                info["dunn_scores"] = scores
            info["strategy"] = state.to_dict()
        elif self.name == "pca":
            state = pca_fit(X, self.variance_target)
            info["n_components"] = state.n_components
        elif self.name == "pca2d":
            state = pca2d_fit(images, self.variance_target)
            info["n_components"] = state.n_components
        return FittedExtractor(self.name, state, info)


@dataclass(frozen=True, eq=False)
class FittedExtractor:
    name: str
    state: object
    info: dict = field(default_factory=dict)

    def transform(self, X):
        X = np.asarray(X, dtype=np.float64)
        images = X.reshape(-1, 80, 80)
        if self.name in ("local_dct", "raw_dct"):
            return extract_local_dct_batch(images, self.state)
        if self.name == "entropy":
            return extract_entropy_batch(images, self.state)
        if self.name == "pca":
            return pca_transform(self.state, X.reshape(-1, 6400))
        if self.name == "pca2d":
            return pca2d_transform(self.state, images)
        return X.reshape(-1, 6400).copy()
