"""Shared classifier types: the training gallery and per-class score sets."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..transforms import FeatureVector

HIGHER = "higher"
LOWER = "lower"

STD_FLOOR = 1e-8


def as_vector(x: FeatureVector | np.ndarray) -> np.ndarray:
    if isinstance(x, FeatureVector):
        return x.coeffs
    return np.asarray(x, dtype=np.float64).ravel()


@dataclass(eq=False)
class Gallery:
    """Stacked labeled training vectors plus per-dimension normalization stats.

    Nearest-neighbor classification uses the raw rows; the network classifiers
    consume the z-scored view (std floored at ``STD_FLOOR``).
    """

    matrix: np.ndarray        # (n, d) raw feature rows
    labels: np.ndarray        # (n,) subject ids
    mean: np.ndarray = field(init=False)
    std: np.ndarray = field(init=False)
    subject_ids: np.ndarray = field(init=False)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.matrix.ndim != 2 or self.matrix.shape[0] == 0:
            raise ValueError("gallery matrix must be a nonempty (n, d) array")
        if self.labels.shape != (self.matrix.shape[0],):
            raise ValueError("labels must align with gallery rows")
        self.mean = self.matrix.mean(axis=0)
        self.std = np.maximum(self.matrix.std(axis=0), STD_FLOOR)
        self.subject_ids = np.unique(self.labels)

    @classmethod
    def from_features(cls, features: Sequence[FeatureVector]) -> "Gallery":
        if not features:
            raise ValueError("gallery requires at least one feature vector")
        dims = {fv.dim for fv in features}
        if len(dims) != 1:
            raise ValueError(f"feature vectors have mixed dims: {sorted(dims)}")
        if any(fv.label is None for fv in features):
            raise ValueError("gallery feature vectors must carry subject labels")
        return cls(
            matrix=np.stack([fv.coeffs for fv in features]),
            labels=np.array([fv.label for fv in features]),
        )

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def normalized_matrix(self) -> np.ndarray:
        return (self.matrix - self.mean) / self.std

    def normalize(self, x: FeatureVector | np.ndarray) -> np.ndarray:
        vec = as_vector(x)
        if vec.size != self.dim:
            raise ValueError(f"probe dim {vec.size} != gallery dim {self.dim}")
        return (vec - self.mean) / self.std


def make_targets(gallery: Gallery) -> np.ndarray:
    """(n, S) matrix, +1 on the row's own subject column, -1 elsewhere."""
    t = -np.ones((gallery.size, gallery.subject_ids.size))
    col = {int(sid): j for j, sid in enumerate(gallery.subject_ids)}
    for i, label in enumerate(gallery.labels):
        t[i, col[int(label)]] = 1.0
    return t


@dataclass(eq=False)
class ScoreSet:
    """One similarity score per subject from a single classifier for one probe."""

    scores: np.ndarray
    subject_ids: np.ndarray
    polarity: str
    classifier_id: str

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64)
        self.subject_ids = np.asarray(self.subject_ids, dtype=np.int64)
        if self.scores.shape != self.subject_ids.shape or self.scores.ndim != 1:
            raise ValueError("scores and subject_ids must be matching 1-D arrays")
        if self.polarity not in (HIGHER, LOWER):
            raise ValueError(f"polarity must be {HIGHER!r} or {LOWER!r}")
        if not np.all(np.isfinite(self.scores)):
            raise ValueError("scores must all be finite")

    def best_subject(self) -> int:
        """Winning subject; ties resolve to the lowest subject id."""
        order = np.argsort(self.subject_ids, kind="stable")
        scores = self.scores[order]
        idx = np.argmax(scores) if self.polarity == HIGHER else np.argmin(scores)
        return int(self.subject_ids[order][idx])
