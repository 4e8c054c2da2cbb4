"""Cluster validity indices and the K sweep used to estimate the number of
activities.

Spread and separation follow one convention shared by Davies-Bouldin and
Dunn: a cluster's spread is the *sum* of squared member-to-centroid
distances and the separation of two clusters is the squared distance
between their centroids. Silhouette uses plain Euclidean distances.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from ._seeds import derive_seed
from .clustering import ClustererConfig, kmeans_fit, _pairwise

DEFAULT_KS = tuple(range(2, 11))


def _as_2d(Z):
    Z = np.asarray(Z, dtype=np.float64)
    return Z[:, None] if Z.ndim == 1 else Z


def _check_centers(labels, centers):
    centers = _as_2d(centers)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= centers.shape[0]):
        raise ValueError(
            f"labels reference cluster {labels.max()} but only {centers.shape[0]} centers were given"
        )
    return labels, centers


def distortion(Z, labels, centers):
    """Mean squared distance from each sample to its nearest center."""
    Z = _as_2d(Z)
    labels, centers = _check_centers(labels, centers)
    if labels.shape[0] != Z.shape[0]:
        raise ValueError("labels length does not match Z")
    if centers.shape[1] != Z.shape[1]:
        raise ValueError("center dimension does not match Z")
    return float(_pairwise(Z, centers).min(axis=1).mean())


def silhouette(Z, labels):
    Z = _as_2d(Z)
    labels = np.asarray(labels)
    ids, inv = np.unique(labels, return_inverse=True)
    if ids.size < 2:
        raise ValueError("silhouette needs at least 2 clusters")
    n = Z.shape[0]
    dist = np.sqrt(_pairwise(Z, Z))
    onehot = np.zeros((n, ids.size))
    onehot[np.arange(n), inv] = 1.0
    sizes = onehot.sum(0)
    sums = dist @ onehot  # n x K: summed distance to each cluster
    own = sizes[inv]
    a = np.where(own > 1, sums[np.arange(n), inv] / np.maximum(own - 1, 1), 0.0)
    mean_other = sums / sizes[None, :]
    mean_other[np.arange(n), inv] = np.inf
    b = mean_other.min(axis=1)
    denom = np.maximum(a, b)
    s = np.where((own > 1) & (denom > 0), (b - a) / np.where(denom > 0, denom, 1.0), 0.0)
    return float(s.mean())


def cluster_spread(Z, labels, centers, kind="sum"):
    """Per-cluster spread: summed (or mean) squared distance to the centroid."""
    Z = _as_2d(Z)
    labels, centers = _check_centers(labels, centers)
    d = ((Z - centers[labels]) ** 2).sum(axis=1)
    spread = np.bincount(labels, weights=d, minlength=centers.shape[0])
    if kind == "mean":
        counts = np.bincount(labels, minlength=centers.shape[0])
        spread = spread / np.maximum(counts, 1)
    elif kind != "sum":
        raise ValueError(f"unknown spread kind {kind!r}; expected 'sum' or 'mean'")
    return spread


def _occupied(labels, K):
    return np.flatnonzero(np.bincount(labels, minlength=K) > 0)


def davies_bouldin(Z, labels, centers):
    labels, centers = _check_centers(labels, centers)
    spread = cluster_spread(Z, labels, centers)
    ks = _occupied(labels, centers.shape[0])
    if ks.size < 2:
        raise ValueError("Davies-Bouldin needs at least 2 clusters")
    sep = _pairwise(centers[ks], centers[ks])
    worst = np.empty(ks.size)
    for a in range(ks.size):
        ratios = []
        for b in range(ks.size):
            if a == b:
                continue
            if sep[a, b] == 0.0:
                raise ValueError(f"clusters {ks[a]} and {ks[b]} have coincident centroids")
            ratios.append((spread[ks[a]] + spread[ks[b]]) / sep[a, b])
        worst[a] = max(ratios)
    return float(worst.mean())


def dunn(Z, labels, centers, spread="sum"):
    """Smallest centroid separation over the largest cluster spread."""
    labels, centers = _check_centers(labels, centers)
    sp = cluster_spread(Z, labels, centers, spread)
    ks = _occupied(labels, centers.shape[0])
    if ks.size < 2:
        raise ValueError("Dunn's index needs at least 2 clusters")
    max_spread = sp[ks].max()
    if max_spread <= 0.0:
        raise ValueError("Dunn's index undefined: every cluster has zero spread (division by zero)")
    sep = _pairwise(centers[ks], centers[ks])
    iu = np.triu_indices(ks.size, 1)
    return float(sep[iu].min() / max_spread)


# ---------------------------------------------------------------------------
# K sweep


@dataclass
class KSweepReport:
    candidate_ks: list
    distortion: np.ndarray
    silhouette: np.ndarray
    davies_bouldin: np.ndarray
    dunn: np.ndarray
    recommended_k: int
    votes: dict = field(default_factory=dict)
    seed: int = 0

    @property
    def inverse_davies_bouldin(self):
        with np.errstate(divide="ignore"):
            return 1.0 / self.davies_bouldin

    def rows(self):
        inv = self.inverse_davies_bouldin
        for i, k in enumerate(self.candidate_ks):
            yield {
                "k": k,
                "distortion": float(self.distortion[i]),
                "silhouette": float(self.silhouette[i]),
                "davies_bouldin": float(self.davies_bouldin[i]),
                "inverse_davies_bouldin": float(inv[i]),
                "dunn": float(self.dunn[i]),
            }

    def to_csv(self):
        buf = io.StringIO()
        cols = ["k", "distortion", "silhouette", "davies_bouldin", "inverse_davies_bouldin", "dunn"]
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for row in self.rows():
            w.writerow({c: (row[c] if c == "k" else repr(row[c])) for c in cols})
        return buf.getvalue()

    def summary(self):
        return {
            "candidate_ks": list(self.candidate_ks),
            "recommended_k": self.recommended_k,
            "votes": self.votes,
            "seed": self.seed,
            "metrics": list(self.rows()),
        }

    def to_json(self):
        return json.dumps(self.summary(), indent=2, sort_keys=True, default=_json_float)


def _json_float(x):
    return float(x)


def _argmax_k(values, ks):
    """Candidate with the highest finite value; ties go to the smaller K."""
    best = None
    for v, k in zip(values, ks):
        if np.isnan(v):
            continue
        if best is None or v > best[0]:
            best = (v, k)
    return None if best is None else best[1]


def _safe(fn, *args):
    try:
        return fn(*args)
    except (ValueError, ZeroDivisionError):
        return np.nan


def sweep_k(Z, candidate_ks=DEFAULT_KS, clusterer_config=None, seed=0):
    """Fit K-Means for every candidate K and score the four indices.

    The recommendation is a majority vote of the Silhouette, inverse
    Davies-Bouldin and Dunn argmaxes (ties to the smaller K). Distortion
    is only reported, for visual elbow inspection. Each K > smallest is
    additionally warm-started from the previous solution plus the point
    farthest from it, which keeps the distortion curve non-increasing.
    """
    Z = _as_2d(Z)
    cfg = clusterer_config or ClustererConfig(method="kmeans")
    ks = sorted(int(k) for k in candidate_ks)
    if not ks:
        raise ValueError("candidate_ks is empty")
    if ks[-1] > Z.shape[0]:
        raise ValueError(f"largest candidate K={ks[-1]} exceeds n={Z.shape[0]}")
    dist, sil, db, du = [], [], [], []
    prev = None
    for k in ks:
        init = None
        if prev is not None and prev.shape[0] < k:
            init = prev
            while init.shape[0] < k:
                far = int(_pairwise(Z, init).min(axis=1).argmax())
                init = np.vstack([init, Z[far]])
        model = kmeans_fit(
            Z, k, derive_seed(seed, k), cfg.max_iter, cfg.tol, n_init=cfg.n_init, init=init
        )
        prev = model.centers
        dist.append(distortion(Z, model.labels, model.centers))
        sil.append(_safe(silhouette, Z, model.labels) if k >= 2 else np.nan)
        db.append(_safe(davies_bouldin, Z, model.labels, model.centers))
        du.append(_safe(dunn, Z, model.labels, model.centers))
    db = np.array(db)
    with np.errstate(divide="ignore"):
        inv_db = 1.0 / db
    votes = {
        "silhouette": _argmax_k(sil, ks),
        "inverse_davies_bouldin": _argmax_k(inv_db, ks),
        "dunn": _argmax_k(du, ks),
    }
    recommended = majority_vote(list(votes.values()), ks)
    return KSweepReport(ks, np.array(dist), np.array(sil), db, np.array(du), recommended, votes, seed)


def majority_vote(choices, ks):
    counts = {k: 0 for k in ks}
    for c in choices:
        if c is not None:
            counts[c] += 1
    top = max(counts.values())
    if top == 0:
        return ks[0]
    return min(k for k, c in counts.items() if c == top)
