"""Nearest-neighbor identification with sum-of-absolute or sum-of-squared error."""

from __future__ import annotations

import numpy as np
from scipy.spatial import distance as _sdist

from ..transforms import FeatureVector
from .common import Gallery, ScoreSet, LOWER, as_vector

MAD = "mad"
MSE = "mse"

METRICS = (MAD, MSE)


def mad(x: FeatureVector | np.ndarray, y: FeatureVector | np.ndarray) -> float:
    """Sum of absolute coordinate differences."""
    a, b = as_vector(x), as_vector(y)
    if a.size != b.size:
        raise ValueError(f"dim mismatch: {a.size} vs {b.size}")
    return float(np.abs(a - b).sum())


def mse_dist(x: FeatureVector | np.ndarray, y: FeatureVector | np.ndarray) -> float:
    """Sum of squared coordinate differences (no averaging)."""
    a, b = as_vector(x), as_vector(y)
    if a.size != b.size:
        raise ValueError(f"dim mismatch: {a.size} vs {b.size}")
    d = a - b
    return float(d @ d)


def _probe_distances(gallery: Gallery, probe: np.ndarray, metric: str) -> np.ndarray:
    if metric == MAD:
        return np.abs(gallery.matrix - probe).sum(axis=1)
    if metric == MSE:
        d = gallery.matrix - probe
        return np.einsum("ij,ij->i", d, d)
    raise ValueError(f"unknown metric {metric!r}")


def nn_scores(probe: FeatureVector | np.ndarray, gallery: Gallery,
              metric: str = MAD) -> ScoreSet:
    """Per-subject minimum distance to the probe, over raw (unnormalized) rows."""
    vec = as_vector(probe)
    if vec.size != gallery.dim:
        raise ValueError(f"probe dim {vec.size} != gallery dim {gallery.dim}")
    dists = _probe_distances(gallery, vec, metric)
    per_subject = np.array([
        dists[gallery.labels == sid].min() for sid in gallery.subject_ids
    ])
    return ScoreSet(per_subject, gallery.subject_ids, LOWER, f"nn:{metric}")


def nn_classify(probe: FeatureVector | np.ndarray, gallery: Gallery,
                metric: str = MAD) -> tuple[int, ScoreSet]:
    scores = nn_scores(probe, gallery, metric)
    return scores.best_subject(), scores


def nn_classify_batch(probes: np.ndarray, gallery: Gallery,
                      metric: str = MAD) -> np.ndarray:
    """Vectorized labels for a (k, d) probe block; ties go to the lowest id."""
    probes = np.asarray(probes, dtype=np.float64)
    if probes.ndim != 2 or probes.shape[1] != gallery.dim:
        raise ValueError("probes must be (k, d) with d matching the gallery")
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    sp_metric = "cityblock" if metric == MAD else "sqeuclidean"
    dists = _sdist.cdist(probes, gallery.matrix, metric=sp_metric)
    # Reduce to per-subject minima with subjects in ascending-id order so the
    # first argmin hit is the lowest id.
    sids = gallery.subject_ids
    per_subject = np.stack([
        dists[:, gallery.labels == sid].min(axis=1) for sid in sids
    ], axis=1)
    return sids[np.argmin(per_subject, axis=1)]
