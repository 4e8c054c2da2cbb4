"""Local Shannon-entropy features over fixed patch layouts."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._seeds import derive_seed
from ..clustering import ClustererConfig
from .dct import dunn_score, first_argmax

DEFAULT_BINS = 32

# (row0, row1, col0, col1) rectangles on the 80 x 80 image, in output order.
STRATEGY_GEOMETRY = {
    "halves_vertical": [(0, 80, 0, 40), (0, 80, 40, 80)],
    "halves_horizontal": [(0, 40, 0, 80), (40, 80, 0, 80)],
    "grid10": [(r, r + 40, c, c + 16) for r in (0, 40) for c in range(0, 80, 16)],
}
STRATEGIES = tuple(STRATEGY_GEOMETRY)


@dataclass(frozen=True)
class EntropyStrategy:
    id: str = "grid10"
    bins: int = DEFAULT_BINS

    def __post_init__(self):
        if self.id not in STRATEGY_GEOMETRY:
            raise ValueError(f"unknown entropy strategy {self.id!r}; expected one of {STRATEGIES}")
        if self.bins < 2:
            raise ValueError("bins must be at least 2")

    @property
    def rectangles(self):
        return STRATEGY_GEOMETRY[self.id]

    @property
    def n_features(self):
        return len(self.rectangles)

    def to_dict(self):
        return {"id": self.id, "bins": self.bins}


def entropy(patch, bins=DEFAULT_BINS):
    """Shannon entropy in bits of the patch's histogram on [0, 1]."""
    patch = np.asarray(patch, dtype=np.float64)
    if patch.size == 0:
        raise ValueError("entropy of an empty patch")
    if bins < 2:
        raise ValueError("bins must be at least 2")
    _check_unit_range(patch)
    counts, _ = np.histogram(patch, bins=bins, range=(0.0, 1.0))
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log2(p)).sum()) + 0.0


def _check_unit_range(values):
    if not np.all((values >= 0.0) & (values <= 1.0)):
        raise ValueError("entropy features expect values in [0, 1]")


def _entropy_rows(values, bins):
    # per-row histogram entropy of an n x p matrix, values in [0, 1]
    edges = np.linspace(0.0, 1.0, bins + 1)
    idx = np.clip(np.searchsorted(edges, values, side="right") - 1, 0, bins - 1)
    n = values.shape[0]
    counts = np.zeros((n, bins))
    np.add.at(counts, (np.repeat(np.arange(n), values.shape[1]), idx.ravel()), 1.0)
    p = counts / values.shape[1]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -terms.sum(axis=1) + 0.0


def extract_entropy_features(image, strategy):
    image = np.asarray(image, dtype=np.float64)
    return np.array([entropy(image[r0:r1, c0:c1], strategy.bins) for r0, r1, c0, c1 in strategy.rectangles])


def extract_entropy_batch(images, strategy):
    images = np.asarray(images, dtype=np.float64)
    _check_unit_range(images)
    cols = [
        _entropy_rows(images[:, r0:r1, c0:c1].reshape(images.shape[0], -1), strategy.bins)
        for r0, r1, c0, c1 in strategy.rectangles
    ]
    return np.stack(cols, axis=1)


def select_best_entropy_strategy(train_images, clusterer_config=None, seed=0, bins=DEFAULT_BINS,
                                 return_scores=False):
    cfg = clusterer_config or ClustererConfig(method="kmeans")
    images = np.asarray(train_images, dtype=np.float64)
    if images.shape[0] < 2 * cfg.k:
        raise ValueError(f"need at least 2*K={2 * cfg.k} training images, got {images.shape[0]}")
    strategies = [EntropyStrategy(s, bins) for s in STRATEGIES]
    sub_seed = derive_seed(seed, 0xE27)
    scores = [dunn_score(extract_entropy_batch(images, s), cfg.k, sub_seed, cfg) for s in strategies]
    best = strategies[first_argmax(scores)]
    if return_scores:
        return best, dict(zip([s.id for s in strategies], scores))
    return best
