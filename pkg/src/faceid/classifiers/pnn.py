"""Probabilistic neural network: one radial basis neuron per training vector.

Activation for center w_i at probe x is radbas(||w_i - x|| * b) with
radbas(z) = exp(-z^2) and b = sqrt(-ln 0.5)/spread, so a center responds
with 0.5 exactly at distance = spread. Class scores are the per-subject
activation sums rescaled to probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..transforms import FeatureVector
from .common import Gallery, ScoreSet, HIGHER, as_vector


def radbas_bias(spread: float) -> float:
    if spread <= 0:
        raise ValueError("spread must be positive")
    return float(np.sqrt(-np.log(0.5)) / spread)


@dataclass(eq=False)
class PNNModel:
    centers: np.ndarray       # (n, d) z-scored gallery vectors
    labels: np.ndarray        # (n,)
    spread: float
    subject_ids: np.ndarray   # (S,) ascending
    norm_mean: np.ndarray
    norm_std: np.ndarray

    def __post_init__(self):
        if self.spread <= 0:
            raise ValueError("spread must be positive")
        if self.centers.shape[0] != self.labels.shape[0]:
            raise ValueError("one label per center required")

    @property
    def dim(self) -> int:
        return self.centers.shape[1]


def pnn_train(gallery: Gallery, spread: float) -> PNNModel:
    """No fitting beyond storing every normalized gallery vector as a center."""
    if spread <= 0:
        raise ValueError("spread must be positive")
    return PNNModel(centers=gallery.normalized_matrix(),
                    labels=gallery.labels.copy(), spread=float(spread),
                    subject_ids=gallery.subject_ids.copy(),
                    norm_mean=gallery.mean.copy(), norm_std=gallery.std.copy())


def pnn_classify(model: PNNModel, probe: FeatureVector | np.ndarray) -> tuple[int, ScoreSet]:
    """Class probabilities (summing to 1), argmax prediction, lowest id on ties.

    If every activation underflows to zero the network degrades to a nearest
    neighbor decision on the unsquashed distances, reported as a one-hot
    score set.
    """
    vec = as_vector(probe)
    if vec.size != model.dim:
        raise ValueError(f"probe dim {vec.size} != model dim {model.dim}")
    z = (vec - model.norm_mean) / model.norm_std
    dists = np.sqrt(((model.centers - z) ** 2).sum(axis=1))
    acts = np.exp(-(dists * radbas_bias(model.spread)) ** 2)
    class_sums = np.array([
        acts[model.labels == sid].sum() for sid in model.subject_ids
    ])
    total = class_sums.sum()
    if total > 0.0:
        probs = class_sums / total
    else:
        per_subject = np.array([
            dists[model.labels == sid].min() for sid in model.subject_ids
        ])
        winner = model.subject_ids[np.argmin(per_subject)]
        probs = (model.subject_ids == winner).astype(np.float64)
    scores = ScoreSet(probs, model.subject_ids, HIGHER, "pnn")
    return scores.best_subject(), scores
