"""Two-dimensional embeddings for visual inspection: t-SNE, metric MDS
(SMACOF) and locally linear embedding."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh

from ._seeds import make_rng, normalize_seed
from .clustering import _pairwise

TSNE_DEFAULTS = {
    "perplexity": 15.0,
    "iters": 1000,
    "early_exaggeration": 4.0,
    "exaggeration_iters": 100,
    "learning_rate": 100.0,
}


@dataclass
class Embedding:
    coords: np.ndarray
    method: str
    final_loss: float
    iterations: int
    seed: int
    loss_trace: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def to_csv(self, sample_ids=None, labels=None):
        n = self.coords.shape[0]
        ids = range(n) if sample_ids is None else sample_ids
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["sample_id", "x", "y"] + ([] if labels is None else ["label"]))
        for i, sid in enumerate(ids):
            row = [str(sid), repr(float(self.coords[i, 0])), repr(float(self.coords[i, 1]))]
            if labels is not None:
                row.append(str(int(labels[i])))
            w.writerow(row)
        return buf.getvalue()


def _as_matrix(Z):
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim == 1:
        Z = Z[:, None]
    if not np.isfinite(Z).all():
        raise ValueError("input contains non-finite values")
    return Z


# ---------------------------------------------------------------------------
# t-SNE


def _row_entropy_bits(D, beta):
    """Conditional rows P_i (zero diagonal) and their entropies in bits."""
    logits = -D * beta[:, None]
    np.fill_diagonal(logits, -np.inf)
    logits -= logits.max(axis=1, keepdims=True)
    P = np.exp(logits)
    P /= P.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        H = -np.where(P > 0, P * np.log2(np.where(P > 0, P, 1.0)), 0.0).sum(axis=1)
    return P, H


def conditional_affinities(Z, perplexity, tol=1e-5, max_steps=200):
    """Gaussian conditionals with per-point precision bisected to the perplexity.

    Returns ``(P, entropies)`` where row ``i`` of ``P`` is p_{j|i}. The
    bisection runs on log(beta) for all rows at once.
    """
    Z = _as_matrix(Z)
    n = Z.shape[0]
    D = _pairwise(Z, Z)
    target = np.log2(perplexity)
    lo = np.full(n, -np.inf)
    hi = np.full(n, np.inf)
    scale = np.median(D[D > 0]) if (D > 0).any() else 1.0
    log_beta = np.full(n, -np.log(scale))
    for _ in range(max_steps):
        P, H = _row_entropy_bits(D, np.exp(log_beta))
        err = H - target
        if np.all(np.abs(err) < tol):
            break
        too_flat = err > 0  # entropy too high -> sharpen
        lo = np.where(too_flat, log_beta, lo)
        hi = np.where(too_flat, hi, log_beta)
        step = np.where(np.isfinite(lo) & np.isfinite(hi), (lo + hi) / 2.0,
                        np.where(too_flat, log_beta + 1.0, log_beta - 1.0))
        log_beta = np.where(np.abs(err) < tol, log_beta, step)
    P, H = _row_entropy_bits(D, np.exp(log_beta))
    return P, H


def joint_affinities(Z, perplexity):
    P, _ = conditional_affinities(Z, perplexity)
    n = P.shape[0]
    return (P + P.T) / (2.0 * n)


def _kl(P, Q):
    mask = P > 0
    return float((P[mask] * np.log(P[mask] / np.maximum(Q[mask], 1e-300))).sum())


def _student_q(Y):
    num = 1.0 / (1.0 + _pairwise(Y, Y))
    np.fill_diagonal(num, 0.0)
    return num, num / num.sum()


def tsne(Z, perplexity=TSNE_DEFAULTS["perplexity"], seed=0, iters=TSNE_DEFAULTS["iters"],
         early_exaggeration=TSNE_DEFAULTS["early_exaggeration"],
         exaggeration_iters=TSNE_DEFAULTS["exaggeration_iters"],
         learning_rate=TSNE_DEFAULTS["learning_rate"]):
    """Exact t-SNE by gradient descent with momentum and adaptive gains.

    ``loss_trace`` holds KL(P || Q) against the un-exaggerated P at every
    iteration, so the exaggeration phase shows up as warm-up.
    """
    Z = _as_matrix(Z)
    n = Z.shape[0]
    if n < 4:
        raise ValueError("t-SNE needs at least 4 samples")
    if not 2.0 <= perplexity < n:
        raise ValueError(f"perplexity {perplexity} infeasible: need 2 <= perplexity < n={n}")
    seed = normalize_seed(seed)
    params = {"perplexity": perplexity, "iters": iters, "early_exaggeration": early_exaggeration,
              "exaggeration_iters": exaggeration_iters, "learning_rate": learning_rate}
    if np.ptp(Z, axis=0).max() == 0.0:
        # every row identical: uniform P, all-coincident layout, zero gradient
        return Embedding(np.zeros((n, 2)), "tsne", 0.0, 0, seed, [0.0], params)

    P = np.maximum(joint_affinities(Z, perplexity), 1e-300)
    np.fill_diagonal(P, 0.0)
    rng = make_rng(seed)
    Y = rng.normal(0.0, 1e-4, size=(n, 2))
    update = np.zeros_like(Y)
    gains = np.ones_like(Y)
    trace = []
    for it in range(iters):
        exaggerate = it < exaggeration_iters
        Pe = P * early_exaggeration if exaggerate else P
        num, Q = _student_q(Y)
        trace.append(_kl(P, Q))
        W = (Pe - Q) * num
        grad = 4.0 * (np.diag(W.sum(axis=1)) - W) @ Y
        momentum = 0.5 if it < 250 else 0.8
        same_sign = np.sign(grad) == np.sign(update)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        np.maximum(gains, 0.01, out=gains)
        update = momentum * update - learning_rate * gains * grad
        Y = Y + update
        Y -= Y.mean(axis=0)
    _, Q = _student_q(Y)
    final = _kl(P, Q)
    trace.append(final)
    return Embedding(Y, "tsne", final, iters, seed, trace, params)


# ---------------------------------------------------------------------------
# MDS


def stress(dissimilarities, Y):
    """Sum over ordered pairs i != j of (d_ij - ||y_i - y_j||)^2."""
    E = np.sqrt(_pairwise(Y, Y))
    diff = dissimilarities - E
    np.fill_diagonal(diff, 0.0)
    return float((diff ** 2).sum())


def _smacof_run(Dis, Y, max_iter, tol):
    n = Dis.shape[0]
    trace = [stress(Dis, Y)]
    it = 0
    for it in range(1, max_iter + 1):
        E = np.sqrt(_pairwise(Y, Y))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(E > 0, Dis / E, 0.0)
        B = -ratio
        np.fill_diagonal(B, 0.0)
        np.fill_diagonal(B, -B.sum(axis=1))
        Y = B @ Y / n
        trace.append(stress(Dis, Y))
        if trace[-1] < 1e-15 or trace[-2] - trace[-1] <= tol * trace[-2]:
            break
    return Y, trace, it


def classical_scaling(Dis, d=2):
    """Torgerson scaling: top eigenvectors of the double-centred squared distances."""
    n = Dis.shape[0]
    J = np.eye(n) - 1.0 / n
    B = -0.5 * J @ (Dis ** 2) @ J
    vals, vecs = eigh(B, subset_by_index=[n - d, n - 1])
    vals, vecs = vals[::-1], vecs[:, ::-1]
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def mds(Z, iters=1000, seed=0, n_init=4, tol=1e-9, dissimilarity=False):
    """Metric MDS by SMACOF majorisation.

    Runs from the classical-scaling solution and from ``n_init`` seeded
    random starts; each Guttman step cannot increase stress and the run
    with the lowest final stress is returned with its trace.
    """
    Z = _as_matrix(Z)
    if dissimilarity:
        Dis = Z
        if Dis.shape[0] != Dis.shape[1]:
            raise ValueError("dissimilarity matrix must be square")
    else:
        Dis = np.sqrt(_pairwise(Z, Z))
    n = Dis.shape[0]
    if n < 3:
        raise ValueError(f"MDS needs at least 3 samples, got {n}")
    seed = normalize_seed(seed)
    params = {"iters": iters, "n_init": n_init, "tol": tol}
    if Dis.max() == 0.0:
        return Embedding(np.zeros((n, 2)), "mds", 0.0, 0, seed, [0.0], params)
    starts = [classical_scaling(Dis)]
    for r in range(n_init):
        starts.append(make_rng(seed, r).uniform(-1.0, 1.0, size=(n, 2)) * Dis.max())
    best = None
    for Y0 in starts:
        Y, trace, it = _smacof_run(Dis, Y0, iters, tol)
        if best is None or trace[-1] < best[1][-1]:
            best = (Y, trace, it)
    Y, trace, it = best
    Y = Y - Y.mean(axis=0)
    return Embedding(Y, "mds", trace[-1], it, seed, trace, params)


# ---------------------------------------------------------------------------
# LLE


def neighbors(Z, p):
    """Indices of the p nearest neighbours of each row, self excluded, stable on ties."""
    D = _pairwise(Z, Z)
    np.fill_diagonal(D, np.inf)
    return np.argsort(D, axis=1, kind="stable")[:, :p]


def _affine_basis(p):
    # orthonormal basis of {v : sum(v) = 0}
    M = np.eye(p) - 1.0 / p
    U, _, _ = np.linalg.svd(M)
    return U[:, : p - 1]


def reconstruction_weights(Z, p_neighbors=10, reg=1e-3, degeneracy_tol=1e-10):
    """Sum-to-one weights reconstructing each row from its neighbours.

    Returns ``(W, nbrs, regularized)`` with ``W`` dense ``n x n``. The
    constrained least-squares problem is solved on the affine subspace; the
    Gram matrix is regularised (``reg * trace / p`` on the diagonal) only
    when that subproblem is singular.
    """
    Z = _as_matrix(Z)
    n = Z.shape[0]
    if p_neighbors >= n:
        raise ValueError(f"p_neighbors={p_neighbors} must be smaller than n={n}")
    if p_neighbors < 1:
        raise ValueError("p_neighbors must be positive")
    nbrs = neighbors(Z, p_neighbors)
    Q = _affine_basis(p_neighbors)
    w0 = np.full(p_neighbors, 1.0 / p_neighbors)
    W = np.zeros((n, n))
    regularized = np.zeros(n, dtype=bool)
    for i in range(n):
        A = Z[nbrs[i]] - Z[i]
        G = A @ A.T
        tr = np.trace(G)
        if p_neighbors > 1:
            H = Q.T @ G @ Q
            eig_min = np.linalg.eigvalsh(H)[0] if H.size else 0.0
            if eig_min <= degeneracy_tol * max(tr, 1e-300):
                G = G + np.eye(p_neighbors) * (reg * tr / p_neighbors if tr > 0 else reg)
                regularized[i] = True
                H = Q.T @ G @ Q
            c = np.linalg.solve(H, -Q.T @ G @ w0)
            w = w0 + Q @ c
        else:
            w = w0
        W[i, nbrs[i]] = w
    return W, nbrs, regularized


def reconstruction_error(Z, W):
    Z = _as_matrix(Z)
    R = Z - W @ Z
    return float((R ** 2).sum())


def lle(Z, p_neighbors=10, d=2, reg=1e-3):
    """Bottom non-constant eigenvectors of (I - W)^T (I - W), scaled so the
    embedding has identity covariance."""
    Z = _as_matrix(Z)
    n = Z.shape[0]
    if p_neighbors < d:
        raise ValueError("p_neighbors must be at least the embedding dimension")
    if n <= d + 1:
        raise ValueError("too few samples for the requested embedding dimension")
    W, _, regularized = reconstruction_weights(Z, p_neighbors, reg)
    IW = np.eye(n) - W
    M = IW.T @ IW
    # push the constant direction to the top of the spectrum so it is never selected
    shift = max(np.trace(M), 1.0)
    vals, vecs = eigh(M + shift * np.full((n, n), 1.0 / n), subset_by_index=[0, d - 1])
    vecs = vecs - vecs.mean(axis=0)
    vecs /= np.linalg.norm(vecs, axis=0)
    idx = np.argmax(np.abs(vecs), axis=0)
    vecs *= np.sign(vecs[idx, np.arange(d)])
    Y = np.sqrt(n) * vecs
    phi = float(((Y - W @ Y) ** 2).sum())
    params = {"p_neighbors": p_neighbors, "d": d, "reg": reg,
              "regularized_points": int(regularized.sum())}
    return Embedding(Y, "lle", phi, 1, 0, [phi], params)
