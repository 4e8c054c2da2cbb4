"""Local 2-D DCT features.

A square patch of the 80 x 80 image is cut into a 3 x 3 grid of sub-patches,
each sub-patch is transformed with an orthonormal type-II DCT and the first
six coefficients in zig-zag order are kept, giving 9 * 6 = 54 features.
Patch sizes that do not divide by three are split as
``floor(L/3), floor(L/3), L - 2*floor(L/3)`` (13/13/14 for 40).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft

from .._seeds import derive_seed
from ..clustering import ClustererConfig, kmeans_fit
from ..validity import dunn

PATCH_SIZES = (10, 20, 40, 80)
IMAGE_SIDE = 80
SUBGRID = 3
COEFFS_PER_SUBPATCH = 6


@dataclass(frozen=True, order=True)
class DctPatchPlan:
    patch_size: int = 40
    patch_index: int = 0

    def __post_init__(self):
        if self.patch_size not in PATCH_SIZES:
            raise ValueError(f"patch_size must be one of {PATCH_SIZES}, got {self.patch_size}")
        if not 0 <= self.patch_index < self.n_patches:
            raise ValueError(
                f"patch_index {self.patch_index} out of range for {self.patch_size}x{self.patch_size} "
                f"patches ({self.n_patches} candidates)"
            )

    @property
    def per_side(self):
        return IMAGE_SIDE // self.patch_size

    @property
    def n_patches(self):
        return self.per_side ** 2

    @property
    def n_features(self):
        return SUBGRID * SUBGRID * COEFFS_PER_SUBPATCH

    @property
    def origin(self):
        """(row, col) of the patch's top-left pixel; patches are numbered row-major."""
        r, c = divmod(self.patch_index, self.per_side)
        return r * self.patch_size, c * self.patch_size

    def to_dict(self):
        return {"patch_size": self.patch_size, "patch_index": self.patch_index}


def dct2(block):
    """Orthonormal type-II 2-D DCT (DC scaled by 1/sqrt(2) on each axis)."""
    block = np.asarray(block, dtype=np.float64)
    if block.ndim != 2 or block.size == 0:
        raise ValueError("dct2 needs a non-empty 2-D matrix")
    return scipy.fft.dctn(block, type=2, norm="ortho")


@lru_cache(maxsize=None)
def zigzag_order(rows, cols):
    """JPEG zig-zag traversal as a tuple of (row, col) positions."""
    order = []
    for s in range(rows + cols - 1):
        lo, hi = max(0, s - cols + 1), min(s, rows - 1)
        rs = range(lo, hi + 1) if s % 2 else range(hi, lo - 1, -1)
        order.extend((r, s - r) for r in rs)
    return tuple(order)


def zigzag_select(coeffs, k):
    coeffs = np.asarray(coeffs)
    rows, cols = coeffs.shape
    if k > rows * cols:
        raise ValueError(f"k={k} exceeds the {rows}x{cols} matrix size")
    pos = zigzag_order(rows, cols)[:k]
    return np.array([coeffs[r, c] for r, c in pos], dtype=np.float64)


def split_sizes(length, parts=SUBGRID):
    base = length // parts
    return [base] * (parts - 1) + [length - base * (parts - 1)]


def subpatch_bounds(plan):
    """The nine (r0, r1, c0, c1) sub-patch rectangles, row-major."""
    r0, c0 = plan.origin
    edges = np.concatenate([[0], np.cumsum(split_sizes(plan.patch_size))])
    return [
        (r0 + edges[i], r0 + edges[i + 1], c0 + edges[j], c0 + edges[j + 1])
        for i in range(SUBGRID)
        for j in range(SUBGRID)
    ]


def extract_local_dct(image, plan):
    image = np.asarray(image, dtype=np.float64)
    if image.shape != (IMAGE_SIDE, IMAGE_SIDE):
        raise ValueError(f"expected an 80 x 80 image, got {image.shape}")
    return extract_local_dct_batch(image[None], plan)[0]


def extract_local_dct_batch(images, plan):
    """54 features for every image in an ``n x 80 x 80`` stack."""
    images = np.asarray(images, dtype=np.float64)
    out = np.empty((images.shape[0], plan.n_features))
    col = 0
    for r0, r1, c0, c1 in subpatch_bounds(plan):
        coeffs = scipy.fft.dctn(images[:, r0:r1, c0:c1], type=2, norm="ortho", axes=(1, 2))
        for r, c in zigzag_order(r1 - r0, c1 - c0)[:COEFFS_PER_SUBPATCH]:
            out[:, col] = coeffs[:, r, c]
            col += 1
    return out


def candidate_plans(candidate_sizes=PATCH_SIZES):
    """Every plan, ordered by the tie-break rule: patch index, then size."""
    plans = [DctPatchPlan(s, i) for s in sorted(candidate_sizes) for i in range(DctPatchPlan(s, 0).n_patches)]
    return sorted(plans, key=lambda p: (p.patch_index, p.patch_size))


def dunn_score(F, k, seed, config):
    """Dunn's index of a K-Means partition of ``F``; -inf when undefined."""
    model = kmeans_fit(F, k, seed, config.max_iter, config.tol, n_init=config.n_init)
    try:
        return dunn(F, model.labels, model.centers)
    except ValueError:
        return -np.inf


def first_argmax(scores):
    best = 0
    for i, s in enumerate(scores):
        if s > scores[best]:
            best = i
    return best


def select_best_dct_patch(train_images, candidate_sizes=PATCH_SIZES, clusterer_config=None, seed=0,
                          return_scores=False):
    """Pick the patch whose K-Means clustering has the highest Dunn's index.

    Every candidate is clustered with the same seed, so the choice does not
    depend on candidate evaluation order.
    """
    cfg = clusterer_config or ClustererConfig(method="kmeans")
    images = np.asarray(train_images, dtype=np.float64)
    if images.shape[0] < 2 * cfg.k:
        raise ValueError(f"need at least 2*K={2 * cfg.k} training images, got {images.shape[0]}")
    plans = candidate_plans(candidate_sizes)
    sub_seed = derive_seed(seed, 0xDC7)
    scores = [dunn_score(extract_local_dct_batch(images, p), cfg.k, sub_seed, cfg) for p in plans]
    best = plans[first_argmax(scores)]
    if return_scores:
        return best, dict(zip(plans, scores))
    return best
