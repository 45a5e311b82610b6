"""Feature discriminability diagnostics: per-class moments and the
variance-normalized distance between class means, ranked per feature."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .transforms import FeatureVector


@dataclass(frozen=True)
class ClassFeatureStats:
    """Population mean/variance of one feature over one class."""

    mean: float
    variance: float
    count: int


def class_stats(values) -> ClassFeatureStats:
    """Population (1/N) mean and variance of a nonempty value list."""
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("class_stats requires a nonempty value list")
    mean = float(arr.mean())
    return ClassFeatureStats(mean=mean, variance=float(((arr - mean) ** 2).mean()),
                             count=arr.size)


def discriminability(stats_i: ClassFeatureStats, stats_j: ClassFeatureStats,
                     eps: float = 1e-12) -> float:
    """|mean_i - mean_j| / sqrt(var_i + var_j + eps); larger separates better."""
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    return abs(stats_i.mean - stats_j.mean) / np.sqrt(
        stats_i.variance + stats_j.variance + eps
    )


def rank_features(features: list[FeatureVector], eps: float = 1e-12) -> list[tuple[int, float]]:
    """Rank feature dimensions by mean pairwise discriminability over class pairs.

    Returns (feature_index, aggregate_D) sorted descending, ties by index.
    """
    labeled = [fv for fv in features if fv.label is not None]
    if len(labeled) != len(features):
        raise ValueError("all feature vectors must carry a class label")
    dims = {fv.dim for fv in features}
    if len(dims) != 1:
        raise ValueError(f"feature vectors have mixed dims: {sorted(dims)}")
    dim = dims.pop()
    classes = sorted({fv.label for fv in features})
    if len(classes) < 2:
        raise ValueError(f"need >= 2 classes, got {len(classes)}")

    per_class = {
        c: np.stack([fv.coeffs for fv in features if fv.label == c]) for c in classes
    }
    stats = {
        c: [class_stats(mat[:, d]) for d in range(dim)] for c, mat in per_class.items()
    }
    pairs = [(a, b) for i, a in enumerate(classes) for b in classes[i + 1:]]
    scored = []
    for d in range(dim):
        total = sum(discriminability(stats[a][d], stats[b][d], eps) for a, b in pairs)
        scored.append((d, total / len(pairs)))
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored


def write_ranking_csv(ranking: list[tuple[int, float]], path: str | Path) -> None:
    """Export a ranking as CSV: ``rank,feature_index,aggregate_D``."""
    lines = ["rank,feature_index,aggregate_D"]
    for rank, (index, score) in enumerate(ranking, start=1):
        lines.append(f"{rank},{index},{score!r}")
    Path(path).write_text("\n".join(lines) + "\n")
