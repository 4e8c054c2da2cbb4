"""PCA on flattened vectors and 2DPCA on images, both keeping the fewest
components whose cumulative explained variance reaches the target."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_VARIANCE_TARGET = 0.95


@dataclass(frozen=True, eq=False)
class PcaModel:
    mean: np.ndarray
    W: np.ndarray
    explained_variance_ratio: np.ndarray
    eigenvalues: np.ndarray

    @property
    def n_components(self):
        return self.W.shape[1]


@dataclass(frozen=True, eq=False)
class Pca2dModel:
    mean_image: np.ndarray
    W: np.ndarray
    explained_variance_ratio: np.ndarray
    eigenvalues: np.ndarray

    @property
    def n_components(self):
        return self.W.shape[1]


def _n_keep(eigenvalues, target):
    if not 0.0 < target <= 1.0:
        raise ValueError("variance_target must be in (0, 1]")
    ratio = eigenvalues / eigenvalues.sum()
    cum = np.cumsum(ratio)
    # slack absorbs round-off when the target is exactly reachable
    s = int(np.searchsorted(cum, target - 1e-12) + 1)
    return min(s, eigenvalues.size), ratio


def _fix_signs(W):
    # largest-magnitude entry of each basis vector made positive
    idx = np.argmax(np.abs(W), axis=0)
    signs = np.sign(W[idx, np.arange(W.shape[1])])
    signs[signs == 0] = 1.0
    return W * signs


def pca_fit(X, variance_target=DEFAULT_VARIANCE_TARGET):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("pca_fit needs an n x m matrix with n >= 2")
    if not np.isfinite(X).all():
        raise ValueError("pca_fit input contains non-finite values")
    if np.ptp(X, axis=0).max() == 0.0:
        raise ValueError("zero total variance: all rows are identical")
    mean = X.mean(axis=0)
    _, sv, Vt = np.linalg.svd(X - mean, full_matrices=False)
    eig = sv ** 2 / (X.shape[0] - 1)
    if eig.sum() <= 0.0:
        raise ValueError("zero total variance: all rows are identical")
    s, ratio = _n_keep(eig, variance_target)
    W = _fix_signs(Vt[:s].T)
    return PcaModel(mean, W, ratio[:s], eig)


def pca_transform(model, X):
    X = np.asarray(X, dtype=np.float64)
    return (X - model.mean) @ model.W


def pca_inverse(model, Z):
    return model.mean + np.asarray(Z) @ model.W.T


def image_covariance(images):
    """Column covariance (1/n) sum (X_i - Xbar)^T (X_i - Xbar)."""
    images = np.asarray(images, dtype=np.float64)
    A = images - images.mean(axis=0)
    return np.einsum("nij,nik->jk", A, A) / images.shape[0]


def pca2d_fit(images, variance_target=DEFAULT_VARIANCE_TARGET):
    images = np.asarray(images, dtype=np.float64)
    if images.ndim != 3 or images.shape[0] < 2:
        raise ValueError("pca2d_fit needs at least 2 images")
    if not np.isfinite(images).all():
        raise ValueError("pca2d_fit input contains non-finite values")
    if np.ptp(images, axis=0).max() == 0.0:
        raise ValueError("zero total variance: all images are identical")
    V = image_covariance(images)
    vals, vecs = np.linalg.eigh(V)
    order = np.argsort(vals)[::-1]
    vals = np.clip(vals[order], 0.0, None)
    vecs = vecs[:, order]
    if vals.sum() <= 0.0:
        raise ValueError("zero total variance: all images are identical")
    d, ratio = _n_keep(vals, variance_target)
    W = _fix_signs(vecs[:, :d])
    return Pca2dModel(images.mean(axis=0), W, ratio[:d], vals)


def pca2d_project(model, image):
    """Projection (X - Xbar) W as an h x d matrix."""
    return (np.asarray(image, dtype=np.float64) - model.mean_image) @ model.W


def pca2d_transform(model, images):
    """Flattened component-major features; accepts one image or a stack."""
    images = np.asarray(images, dtype=np.float64)
    single = images.ndim == 2
    Y = (images.reshape(-1, *model.mean_image.shape) - model.mean_image) @ model.W
    feats = np.transpose(Y, (0, 2, 1)).reshape(Y.shape[0], -1)
    return feats[0] if single else feats
