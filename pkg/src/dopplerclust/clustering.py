"""K-Means and K-Medoids with seeded k-means++ initialisation.

Both methods use squared Euclidean distance throughout. A fit runs
``n_init`` independent seeded starts and keeps the lowest objective; the
winning start's per-iteration objective trace is kept in ``history``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ._seeds import make_rng, normalize_seed

METHODS = ("kmeans", "kmedoids")


@dataclass(frozen=True)
class ClustererConfig:
    method: str = "kmeans"
    k: int = 5
    n_init: int = 10
    max_iter: int = 300
    tol: float = 1e-6

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown clusterer {self.method!r}; expected one of {METHODS}")

    def fit(self, Z, seed, k=None):
        k = self.k if k is None else k
        if self.method == "kmeans":
            return kmeans_fit(Z, k, seed, self.max_iter, self.tol, n_init=self.n_init)
        return kmedoids_fit(Z, k, seed, self.max_iter, n_init=self.n_init)


@dataclass(frozen=True, eq=False)
class ClusterModel:
    method: str
    centers: np.ndarray
    labels: np.ndarray
    objective: float
    iterations: int
    seed: int
    medoid_indices: np.ndarray | None = None
    history: list = field(default_factory=list)
    converged: bool = True

    @property
    def k(self):
        return self.centers.shape[0]

    def predict(self, Z):
        return assign(self, Z)

    def to_dict(self):
        return {
            "method": self.method,
            "centers": self.centers.tolist(),
            "medoid_indices": None if self.medoid_indices is None else self.medoid_indices.tolist(),
            "seed": self.seed,
            "objective": self.objective,
            "iterations": self.iterations,
            "labels": self.labels.tolist(),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        med = d.get("medoid_indices")
        return cls(
            method=d["method"],
            centers=np.asarray(d["centers"], dtype=np.float64),
            labels=np.asarray(d.get("labels", []), dtype=np.int64),
            objective=float(d["objective"]),
            iterations=int(d.get("iterations", 0)),
            seed=int(d["seed"]),
            medoid_indices=None if med is None else np.asarray(med, dtype=np.int64),
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def sq_distances(A, B):
    """Pairwise squared Euclidean distances, clipped at zero."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    d = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    np.maximum(d, 0.0, out=d)
    return d


def _exact_sq_distances(A, B):
    # broadcast form; exact zeros for identical rows, used where ties matter
    diff = A[:, None, :] - B[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _pairwise(A, B):
    if A.shape[0] * B.shape[0] * A.shape[1] <= 4_000_000:
        return _exact_sq_distances(A, B)
    return sq_distances(A, B)


def _validate(Z, K):
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim == 1:
        Z = Z[:, None]
    if Z.ndim != 2:
        raise ValueError("Z must be a 2-D matrix")
    if not np.isfinite(Z).all():
        raise ValueError("Z contains non-finite values")
    K = int(K)
    if K < 1:
        raise ValueError("K must be at least 1")
    if K > Z.shape[0]:
        raise ValueError(f"K={K} exceeds the number of samples n={Z.shape[0]}")
    return Z, K


def kmeanspp_indices(Z, K, rng):
    """Distance-weighted seeding; returns K distinct row indices."""
    n = Z.shape[0]
    chosen = [int(rng.integers(n))]
    closest = _pairwise(Z, Z[chosen[0]][None, :])[:, 0]
    for _ in range(1, K):
        weights = closest.copy()
        weights[chosen] = 0.0
        total = weights.sum()
        if total > 0:
            idx = int(rng.choice(n, p=weights / total))
        else:
            free = np.setdiff1d(np.arange(n), chosen)
            idx = int(rng.choice(free))
        chosen.append(idx)
        np.minimum(closest, _pairwise(Z, Z[idx][None, :])[:, 0], out=closest)
    return np.array(chosen, dtype=np.int64)


def assign(model, Z):
    """Nearest-center labels; ties go to the lowest cluster index."""
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim == 1:
        Z = Z[:, None] if model.centers.shape[1] == 1 else Z[None, :]
    if Z.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    if Z.shape[1] != model.centers.shape[1]:
        raise ValueError(
            f"dimension mismatch: model has {model.centers.shape[1]} features, got {Z.shape[1]}"
        )
    return np.argmin(_pairwise(Z, model.centers), axis=1).astype(np.int64)


def _objective(Z, centers, labels):
    diff = Z - centers[labels]
    return float(np.einsum("ij,ij->", diff, diff))


def _fill_empty(Z, centers, labels, d):
    """Give each empty cluster the point farthest from its own center.

    Only points from clusters with more than one member are eligible, so
    the repair never creates a new empty cluster.
    """
    K = centers.shape[0]
    counts = np.bincount(labels, minlength=K)
    for k in np.flatnonzero(counts == 0):
        own = d[np.arange(len(labels)), labels].copy()
        own[counts[labels] <= 1] = -np.inf
        far = int(np.argmax(own))
        counts[labels[far]] -= 1
        labels[far] = k
        counts[k] = 1
        centers[k] = Z[far]
        d[:, k] = _pairwise(Z, Z[far][None, :])[:, 0]
    return labels


def _assign_step(Z, centers):
    d = _pairwise(Z, centers)
    labels = np.argmin(d, axis=1)
    if np.bincount(labels, minlength=centers.shape[0]).min() == 0:
        labels = _fill_empty(Z, centers, labels, d)
    return labels


def _lloyd(Z, centers, max_iter, tol):
    K = centers.shape[0]
    centers = centers.copy()
    labels = _assign_step(Z, centers)
    obj = _objective(Z, centers, labels)
    history = [obj]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        for k in range(K):
            centers[k] = Z[labels == k].mean(axis=0)
        new_labels = _assign_step(Z, centers)
        new_obj = _objective(Z, centers, new_labels)
        history.append(new_obj)
        stable = np.array_equal(new_labels, labels)
        labels = new_labels
        if stable:
            converged = True
            break
        if obj - new_obj <= tol * obj:
            converged = True
            break
        obj = new_obj
    return centers, labels, history, it, converged


def kmeans_fit(Z, K, seed=0, max_iter=300, tol=1e-6, *, n_init=10, init=None):
    """Lloyd's algorithm.

    ``init`` optionally supplies a K x m starting center matrix that is run
    in addition to the ``n_init`` k-means++ starts.
    """
    Z, K = _validate(Z, K)
    seed = normalize_seed(seed)
    starts = []
    for r in range(n_init):
        rng = make_rng(seed, r)
        starts.append(Z[kmeanspp_indices(Z, K, rng)])
    if init is not None:
        init = np.asarray(init, dtype=np.float64).reshape(K, Z.shape[1])
        starts.append(init)
    best = None
    for start in starts:
        run = _lloyd(Z, start, max_iter, tol)
        if best is None or run[2][-1] < best[2][-1]:
            best = run
    centers, labels, history, iters, converged = best
    return ClusterModel(
        method="kmeans",
        centers=centers,
        labels=labels.astype(np.int64),
        objective=history[-1],
        iterations=iters,
        seed=seed,
        history=history,
        converged=converged,
    )


def _medoid_assign(D, medoids):
    labels = np.argmin(D[:, medoids], axis=1)
    # a medoid always belongs to its own cluster (matters only for duplicate rows)
    labels[medoids] = np.arange(len(medoids))
    return labels


def _medoid_cost(D, medoids, labels):
    return float(D[np.arange(D.shape[0]), medoids[labels]].sum())


def _voronoi_medoids(D, medoids, max_iter):
    K = len(medoids)
    medoids = medoids.copy()
    labels = _medoid_assign(D, medoids)
    history = [_medoid_cost(D, medoids, labels)]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        new_medoids = medoids.copy()
        for k in range(K):
            members = np.flatnonzero(labels == k)
            costs = D[np.ix_(members, members)].sum(axis=1)
            new_medoids[k] = members[int(np.argmin(costs))]
        labels = _medoid_assign(D, new_medoids)
        history.append(_medoid_cost(D, new_medoids, labels))
        if np.array_equal(new_medoids, medoids):
            converged = True
            break
        medoids = new_medoids
    return medoids, labels, history, it, converged


def kmedoids_fit(Z, K, seed=0, max_iter=300, *, n_init=10):
    """Alternating medoid update / reassignment, every center a data row.

    Within a cluster the new medoid is the member with the smallest summed
    squared distance to the other members; ties go to the lower row index.
    """
    Z, K = _validate(Z, K)
    seed = normalize_seed(seed)
    D = _pairwise(Z, Z)
    best = None
    for r in range(n_init):
        start = kmeanspp_indices(Z, K, make_rng(seed, r))
        run = _voronoi_medoids(D, start, max_iter)
        if best is None or run[2][-1] < best[2][-1]:
            best = run
    medoids, labels, history, iters, converged = best
    return ClusterModel(
        method="kmedoids",
        centers=Z[medoids].copy(),
        labels=labels.astype(np.int64),
        objective=history[-1],
        iterations=iters,
        seed=seed,
        medoid_indices=medoids.astype(np.int64),
        history=history,
        converged=converged,
    )

