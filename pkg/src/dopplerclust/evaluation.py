"""Leave-one-subject-out evaluation with best-match label alignment.

Labels are only touched after clustering: extractor fitting and clusterer
fitting receive the feature matrix alone. The cluster-to-class mapping is
learned on the training folds and re-used unchanged on the held-out subject.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from ._seeds import derive_seed, normalize_seed
from .clustering import ClustererConfig, assign
from .features.extractors import ExtractorConfig
from .validity import sweep_k

EXHAUSTIVE_MAX_K = 8
MAX_MATCH_K = 20


class FoldError(RuntimeError):
    def __init__(self, subject, cause):
        super().__init__(f"fold holding out subject {subject} failed: {cause}")
        self.subject = subject


def loocv_split(ds):
    """One (train, test) index pair per subject, in ascending subject order."""
    subjects = np.asarray(ds.subjects if hasattr(ds, "subjects") else ds)
    ids = np.unique(subjects)
    if ids.size < 2:
        raise ValueError("leave-one-subject-out needs at least 2 subjects")
    return [(np.flatnonzero(subjects != s), np.flatnonzero(subjects == s)) for s in ids]


def contingency(pred, truth, K):
    C = np.zeros((K, K), dtype=np.int64)
    np.add.at(C, (np.asarray(pred), np.asarray(truth)), 1)
    return C


def _match_exhaustive(C):
    K = C.shape[0]
    best, best_perm = -1, None
    for perm in itertools.permutations(range(K)):
        score = C[np.arange(K), perm].sum()
        if score > best:
            best, best_perm = score, perm
    return np.array(best_perm, dtype=np.int64)


def _match_assignment(C):
    """Optimal assignment, then the lexicographically smallest optimum.

    Positions are fixed left to right: each cluster takes the smallest class
    for which the remaining sub-problem still reaches the optimal total.
    """
    K = C.shape[0]

    def best_total(rows, cols):
        if not rows:
            return 0
        sub = C[np.ix_(rows, cols)]
        r, c = linear_sum_assignment(sub, maximize=True)
        return int(sub[r, c].sum())

    target = best_total(list(range(K)), list(range(K)))
    mapping = np.empty(K, dtype=np.int64)
    free = list(range(K))
    acc = 0
    for i in range(K):
        rest = list(range(i + 1, K))
        for cls in free:
            cols = [c for c in free if c != cls]
            if acc + C[i, cls] + best_total(rest, cols) == target:
                mapping[i] = cls
                acc += C[i, cls]
                free.remove(cls)
                break
    return mapping


def match_labels(pred, truth, K, max_k=MAX_MATCH_K, method="auto"):
    """Cluster -> class bijection maximising the number of agreements.

    Returns ``mapping`` with ``mapping[cluster] = class``; among optimal
    bijections the lexicographically smallest is returned.
    """
    pred = np.asarray(pred, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if pred.shape != truth.shape:
        raise ValueError("pred and truth must have the same length")
    if K > max_k:
        raise ValueError(f"K={K} exceeds the matching guard max_k={max_k}")
    for name, arr in (("pred", pred), ("truth", truth)):
        if arr.size and (arr.min() < 0 or arr.max() >= K):
            raise ValueError(f"{name} labels must lie in 0..{K - 1}")
    C = contingency(pred, truth, K)
    if method == "exhaustive" or (method == "auto" and K <= EXHAUSTIVE_MAX_K):
        return _match_exhaustive(C)
    return _match_assignment(C)


def accuracy_and_confusion(pred, truth, mapping):
    """Apply the mapping and count; rows are true classes, columns predicted."""
    mapping = np.asarray(mapping, dtype=np.int64)
    K = mapping.size
    if sorted(mapping.tolist()) != list(range(K)):
        raise ValueError("mapping is not a bijection on 0..K-1")
    pred = np.asarray(pred, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    confusion = contingency(truth, mapping[pred], K) if pred.size else np.zeros((K, K), dtype=np.int64)
    total = confusion.sum()
    acc = float(np.trace(confusion) / total) if total else float("nan")
    return acc, confusion


@dataclass
class FoldResult:
    held_out_subject: int
    train_accuracy: float
    test_accuracy: float
    confusion: np.ndarray
    mapping: np.ndarray
    k: int
    train_clusters: np.ndarray
    test_clusters: np.ndarray
    extractor_info: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "held_out_subject": self.held_out_subject,
            "train_accuracy": self.train_accuracy,
            "test_accuracy": self.test_accuracy,
            "confusion": self.confusion.tolist(),
            "mapping": self.mapping.tolist(),
            "k": self.k,
            "train_clusters": self.train_clusters.tolist(),
            "test_clusters": self.test_clusters.tolist(),
            "extractor": self.extractor_info,
        }


@dataclass
class ExperimentReport:
    folds: list
    extractor: dict
    clusterer: dict
    seed: int
    class_ids: list

    @property
    def train_accuracies(self):
        return np.array([f.train_accuracy for f in self.folds])

    @property
    def test_accuracies(self):
        return np.array([f.test_accuracy for f in self.folds])

    @property
    def train_mean(self):
        return float(self.train_accuracies.mean())

    @property
    def train_std(self):
        return float(self.train_accuracies.std())

    @property
    def test_mean(self):
        return float(self.test_accuracies.mean())

    @property
    def test_std(self):
        return float(self.test_accuracies.std())

    @property
    def label(self):
        return f"{self.extractor['name']}+{self.clusterer['method']}"

    def to_dict(self):
        return {
            "method": self.label,
            "extractor": self.extractor,
            "clusterer": self.clusterer,
            "seed": self.seed,
            "class_ids": self.class_ids,
            "train_accuracy": {"mean": self.train_mean, "std": self.train_std},
            "test_accuracy": {"mean": self.test_mean, "std": self.test_std},
            "folds": [f.to_dict() for f in self.folds],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def confusion_csv(self, fold):
        f = self.folds[fold]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["true\\pred"] + [str(c) for c in self.class_ids])
        for cls, row in zip(self.class_ids, f.confusion.tolist()):
            w.writerow([str(cls)] + [str(v) for v in row])
        return buf.getvalue()


def summary_markdown(reports):
    """Mean +/- std table, one row per extractor+clusterer combination."""
    lines = [
        "| Method | Extractor | Clusterer | Train accuracy | Test accuracy |",
        "|---|---|---|---|---|",
    ]
    for r in reports:
        lines.append(
            f"| {r.label} | {r.extractor['name']} | {r.clusterer['method']} "
            f"| {100 * r.train_mean:.2f}% ± {100 * r.train_std:.2f} "
            f"| {100 * r.test_mean:.2f}% ± {100 * r.test_std:.2f} |"
        )
    return "\n".join(lines) + "\n"


def _run_fold(fold_no, train_idx, test_idx, X, subjects, truth, n_classes, extractor_config,
              clusterer_config, seed):
    subject = int(subjects[test_idx[0]])
    try:
        Xtr, Xts = X[train_idx], X[test_idx]
        k = clusterer_config.k
        if k == "auto":
            report = sweep_k(Xtr, clusterer_config=ClustererConfig("kmeans", 2, clusterer_config.n_init,
                                                                    clusterer_config.max_iter,
                                                                    clusterer_config.tol),
                             seed=derive_seed(seed, fold_no, 1))
            k = report.recommended_k
        k = int(k)
        fitted = extractor_config.fit(Xtr, k=k, seed=derive_seed(seed, fold_no, 2))
        Ftr, Fts = fitted.transform(Xtr), fitted.transform(Xts)
        cfg = ClustererConfig(clusterer_config.method, k, clusterer_config.n_init,
                              clusterer_config.max_iter, clusterer_config.tol)
        model = cfg.fit(Ftr, derive_seed(seed, fold_no, 3))
        test_clusters = assign(model, Fts)
        # labels enter only from here on
        K = max(k, n_classes)
        mapping = match_labels(model.labels, truth[train_idx], K)
        train_acc, _ = accuracy_and_confusion(model.labels, truth[train_idx], mapping)
        test_acc, confusion = accuracy_and_confusion(test_clusters, truth[test_idx], mapping)
    except Exception as exc:
        raise FoldError(subject, exc) from exc
    return FoldResult(subject, train_acc, test_acc, confusion, mapping, k,
                      model.labels, test_clusters, fitted.info)


def run_experiment(ds, extractor_config=None, clusterer_config=None, seed=0, n_jobs=1):
    """Leave-one-subject-out run; see module docstring for the protocol."""
    if ds.labels is None:
        raise ValueError("run_experiment needs a labelled dataset for scoring")
    extractor_config = extractor_config or ExtractorConfig()
    clusterer_config = clusterer_config or ClustererConfig(method="kmedoids")
    seed = normalize_seed(seed)
    class_ids, truth = np.unique(ds.labels, return_inverse=True)
    folds = loocv_split(ds)
    args = [
        (i, tr, ts, ds.X, ds.subjects, truth, class_ids.size, extractor_config, clusterer_config, seed)
        for i, (tr, ts) in enumerate(folds)
    ]
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(lambda a: _run_fold(*a), args))
    else:
        results = [_run_fold(*a) for a in args]
    clusterer = {
        "method": clusterer_config.method,
        "k": clusterer_config.k,
        "n_init": clusterer_config.n_init,
        "max_iter": clusterer_config.max_iter,
        "tol": clusterer_config.tol,
    }
    return ExperimentReport(results, extractor_config.to_dict(), clusterer, seed,
                            [int(c) for c in class_ids])
