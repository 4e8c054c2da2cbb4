"""Doppler spectrogram datasets: loading, saving, layout reshapes and a
synthetic stand-in generator.

Layouts
-------
A recording is a ``2 x 100 x 32`` cube (direction, Doppler bin, time step).
It is flattened in C order (direction-major, then Doppler bin, then time)
to a 6400-vector, and that vector is filled row-major into an ``80 x 80``
image. Every patch geometry downstream assumes exactly this ordering.

On disk the ``vector6400`` layout is a CSV with header
``subject,label,f0,...,f6399``; an empty label cell means "unlabelled".
The ``cube`` layout is an ``.npz`` archive with arrays ``cube``
(n x 2 x 100 x 32), ``subject`` and, optionally, ``label``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._seeds import make_rng

CUBE_SHAPE = (2, 100, 32)
N_FEATURES = 6400
IMAGE_SHAPE = (80, 80)
LAYOUTS = ("vector6400", "cube")


class DatasetError(ValueError):
    """Malformed or out-of-range dataset input."""


@dataclass(frozen=True)
class SpectrogramSample:
    cube: np.ndarray
    subject_id: int
    label: int | None = None

    @property
    def vector(self):
        return self.cube.reshape(N_FEATURES)

    @property
    def image(self):
        return reshape_to_image(self.vector)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable collection of flattened spectrograms.

    ``X`` holds one 6400-vector per row. ``labels`` is ``None`` for unlabelled
    data and is only meant for evaluation.
    """

    X: np.ndarray
    subjects: np.ndarray
    labels: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64, copy=True)
        if X.ndim != 2 or X.shape[1] != N_FEATURES:
            raise DatasetError(f"expected an n x {N_FEATURES} matrix, got shape {X.shape}")
        subjects = np.array(self.subjects, dtype=np.int64, copy=True).reshape(-1)
        if subjects.shape[0] != X.shape[0]:
            raise DatasetError("subjects length does not match sample count")
        labels = None
        if self.labels is not None:
            labels = np.array(self.labels, dtype=np.int64, copy=True).reshape(-1)
            if labels.shape[0] != X.shape[0]:
                raise DatasetError("labels length does not match sample count")
            labels.setflags(write=False)
        _check_values(X)
        X.setflags(write=False)
        subjects.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "subjects", subjects)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return self.X.shape[0]

    def __getitem__(self, i):
        label = None if self.labels is None else int(self.labels[i])
        return SpectrogramSample(self.X[i].reshape(CUBE_SHAPE), int(self.subjects[i]), label)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        if (self.labels is None) != (other.labels is None):
            return False
        return (
            np.array_equal(self.X, other.X)
            and np.array_equal(self.subjects, other.subjects)
            and (self.labels is None or np.array_equal(self.labels, other.labels))
        )

    __hash__ = None

    @property
    def n_samples(self):
        return self.X.shape[0]

    @property
    def subject_ids(self):
        return np.unique(self.subjects)

    @property
    def n_subjects(self):
        return int(self.subject_ids.size)

    @property
    def n_activities(self):
        return 0 if self.labels is None else int(np.unique(self.labels).size)

    def images(self):
        """All samples as an ``n x 80 x 80`` array (row-major reshape)."""
        return self.X.reshape(-1, *IMAGE_SHAPE)

    def cubes(self):
        return self.X.reshape(-1, *CUBE_SHAPE)

    def subset(self, indices):
        idx = np.asarray(indices, dtype=np.int64)
        labels = None if self.labels is None else self.labels[idx]
        return Dataset(self.X[idx], self.subjects[idx], labels, dict(self.meta))

    def without_labels(self):
        return Dataset(self.X, self.subjects, None, dict(self.meta))


def _check_values(X):
    bad = ~np.isfinite(X) | (X < 0.0) | (X > 1.0)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise DatasetError(
            f"value {X[r, c]!r} at row {r}, column f{c} is outside [0, 1] or not finite"
        )


def reshape_to_image(v):
    """Row-major fill of a 6400-vector into an 80 x 80 image."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (N_FEATURES,):
        raise ValueError(f"expected a vector of length {N_FEATURES}, got shape {v.shape}")
    return v.reshape(IMAGE_SHAPE).copy()


def flatten_image(image):
    image = np.asarray(image, dtype=np.float64)
    if image.shape != IMAGE_SHAPE:
        raise ValueError(f"expected an 80 x 80 image, got shape {image.shape}")
    return image.reshape(N_FEATURES).copy()


def flatten_cube(cube):
    cube = np.asarray(cube, dtype=np.float64)
    if cube.shape != CUBE_SHAPE:
        raise ValueError(f"expected a cube of shape {CUBE_SHAPE}, got {cube.shape}")
    return cube.reshape(N_FEATURES).copy()


# ---------------------------------------------------------------------------
# persistence


def load_dataset(path, layout="vector6400"):
    path = Path(path)
    if layout not in LAYOUTS:
        raise ValueError(f"unknown layout {layout!r}; expected one of {LAYOUTS}")
    if not path.is_file():
        raise FileNotFoundError(f"dataset file not found: {path}")
    if layout == "cube":
        return _load_cube(path)
    return _load_csv(path)


def _load_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if not rows:
        raise DatasetError(f"{path}: empty file, expected a header and data rows")
    header, body = rows[0], rows[1:]
    width = N_FEATURES + 2
    if len(header) != width or header[0].strip() != "subject" or header[1].strip() != "label":
        raise DatasetError(
            f"{path}: header must be 'subject,label,f0..f{N_FEATURES - 1}' "
            f"({width} columns), got {len(header)} columns"
        )
    if not body:
        raise DatasetError(f"{path}: header present but no data rows")

    X = np.empty((len(body), N_FEATURES))
    subjects = np.empty(len(body), dtype=np.int64)
    labels = []
    for i, row in enumerate(body):
        if len(row) != width:
            raise DatasetError(f"{path}: row {i} has {len(row)} columns, expected {width}")
        try:
            subjects[i] = int(row[0])
        except ValueError:
            raise DatasetError(f"{path}: row {i}, column subject: not an integer: {row[0]!r}") from None
        lab = row[1].strip()
        try:
            labels.append(int(lab) if lab else None)
        except ValueError:
            raise DatasetError(f"{path}: row {i}, column label: not an integer: {lab!r}") from None
        try:
            X[i] = np.array(row[2:], dtype=np.float64)
        except ValueError:
            for j, cell in enumerate(row[2:]):
                try:
                    float(cell)
                except ValueError:
                    raise DatasetError(f"{path}: row {i}, column f{j}: not a number: {cell!r}") from None
            raise
    try:
        _check_values(X)
    except DatasetError as exc:
        raise DatasetError(f"{path}: {exc}") from None

    if all(lab is None for lab in labels):
        lab_arr = None
    elif any(lab is None for lab in labels):
        raise DatasetError(f"{path}: label column is only partially filled")
    else:
        lab_arr = np.array(labels, dtype=np.int64)
    return Dataset(X, subjects, lab_arr, {"source": str(path), "layout": "vector6400"})


def _load_cube(path):
    try:
        with np.load(path) as npz:
            cube = np.asarray(npz["cube"], dtype=np.float64)
            subjects = np.asarray(npz["subject"])
            labels = np.asarray(npz["label"]) if "label" in npz.files else None
    except (KeyError, ValueError, OSError) as exc:
        raise DatasetError(f"{path}: not a valid cube archive ({exc})") from None
    if cube.ndim != 4 or cube.shape[1:] != CUBE_SHAPE or cube.shape[0] == 0:
        raise DatasetError(f"{path}: cube array must have shape (n, 2, 100, 32), got {cube.shape}")
    X = cube.reshape(cube.shape[0], N_FEATURES)
    try:
        _check_values(X)
    except DatasetError as exc:
        raise DatasetError(f"{path}: {exc}") from None
    return Dataset(X, subjects, labels, {"source": str(path), "layout": "cube"})


def save_dataset(ds, path, layout="vector6400"):
    """Write ``ds``; floats use shortest round-trip repr so reloading is exact."""
    path = Path(path)
    if layout == "cube":
        arrays = {"cube": ds.cubes(), "subject": ds.subjects}
        if ds.labels is not None:
            arrays["label"] = ds.labels
        with open(path, "wb") as fh:
            np.savez(fh, **arrays)
        return path
    if layout != "vector6400":
        raise ValueError(f"unknown layout {layout!r}")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["subject", "label"] + [f"f{j}" for j in range(N_FEATURES)])
        for i in range(len(ds)):
            label = "" if ds.labels is None else str(int(ds.labels[i]))
            w.writerow([str(int(ds.subjects[i])), label] + [repr(v) for v in ds.X[i].tolist()])
    return path


# ---------------------------------------------------------------------------
# synthetic generator


@dataclass(frozen=True)
class SynthConfig:
    n_subjects: int = 4
    reps_per_activity: int = 10
    n_activities: int = 5
    noise_level: float = 0.05
    seed: int = 42

    def validate(self):
        if self.reps_per_activity < 1:
            raise ValueError("reps_per_activity must be at least 1")
        if self.n_subjects < 1:
            raise ValueError("n_subjects must be at least 1")
        if not 1 <= self.n_activities <= CUBE_SHAPE[1] // 4:
            raise ValueError(f"n_activities must be in [1, {CUBE_SHAPE[1] // 4}]")
        if not (self.noise_level >= 0 and math.isfinite(self.noise_level)):
            raise ValueError("noise_level must be a finite value >= 0")


def activity_template(k, n_activities, phase=0.0, gain=1.0):
    """Noise-free cube for activity ``k`` (0-based).

    Activity ``k`` puts a Gaussian energy bump in Doppler band ``k`` of the
    forward direction (mirrored, weaker, in the reverse direction) and
    modulates it in time with a class-specific period.
    """
    n_bins, n_t = CUBE_SHAPE[1], CUBE_SHAPE[2]
    width = n_bins / n_activities
    centre = (k + 0.5) * width
    b = np.arange(n_bins)
    envelope = np.exp(-0.5 * ((b - centre) / (width / 4.0)) ** 2)
    period = 4.0 + 3.0 * k
    t = np.arange(n_t)
    modulation = 0.6 + 0.4 * np.cos(2.0 * np.pi * t / period + phase)
    cube = np.full(CUBE_SHAPE, 0.05)
    cube[0] += 0.75 * gain * envelope[:, None] * modulation[None, :]
    cube[1] += 0.35 * gain * envelope[::-1, None] * modulation[None, ::-1]
    return cube


def generate_synthetic(config=None, **kwargs):
    """Deterministic labelled stand-in for the real recordings.

    Samples are ordered subject-major, then activity, then repetition;
    subjects are numbered from 1 and labels from 1.
    """
    if config is None:
        config = SynthConfig(**kwargs)
    elif kwargs:
        raise TypeError("pass either a SynthConfig or keyword arguments, not both")
    config.validate()
    rng = make_rng(config.seed)
    gains = rng.uniform(0.8, 1.2, size=config.n_subjects)
    X, subjects, labels = [], [], []
    for s in range(config.n_subjects):
        for k in range(config.n_activities):
            for _ in range(config.reps_per_activity):
                phase = rng.uniform(0.0, 2.0 * np.pi)
                cube = activity_template(k, config.n_activities, phase, gains[s])
                if config.noise_level > 0:
                    cube = cube + rng.normal(0.0, config.noise_level, size=CUBE_SHAPE)
                X.append(np.clip(cube, 0.0, 1.0).reshape(N_FEATURES))
                subjects.append(s + 1)
                labels.append(k + 1)
    meta = {"source": "synthetic", "config": config.__dict__.copy()}
    return Dataset(np.array(X), np.array(subjects), np.array(labels), meta)
