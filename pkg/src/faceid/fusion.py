"""Opinion fusion: rescale per-classifier score sets and average them.

Distances and network outputs live on incommensurable scales, so each score
set is first mapped to a common [0,1] similarity scale (min-max over the
probe's own scores, after negating lower-is-better sets). The fused opinion
is the element-wise mean. A z-score mode is kept for sensitivity checks; its
outputs are deliberately left unclamped since min-max applied after a z-score
would reproduce plain min-max exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .classifiers.common import ScoreSet, LOWER

MINMAX = "minmax"
ZSCORE = "zscore"

MODES = (MINMAX, ZSCORE)


@dataclass(eq=False)
class NormalizedScoreSet:
    """Higher-is-better similarity scores on a shared scale, ids ascending."""

    scores: np.ndarray
    subject_ids: np.ndarray
    classifier_id: str
    mode: str = MINMAX

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64)
        self.subject_ids = np.asarray(self.subject_ids, dtype=np.int64)
        if self.scores.shape != self.subject_ids.shape or self.scores.ndim != 1:
            raise ValueError("scores and subject_ids must be matching 1-D arrays")
        if not np.all(np.isfinite(self.scores)):
            raise ValueError("scores must all be finite")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.mode == MINMAX and (self.scores.min() < 0 or self.scores.max() > 1):
            raise ValueError("min-max normalized scores must lie in [0, 1]")
        if np.any(np.diff(self.subject_ids) < 0):
            raise ValueError("subject_ids must be ascending")

    def best_subject(self) -> int:
        """Argmax subject; ties resolve to the lowest subject id."""
        return int(self.subject_ids[np.argmax(self.scores)])


def normalize_scores(raw: ScoreSet, mode: str = MINMAX) -> NormalizedScoreSet:
    """Map one classifier's scores onto the fusion scale.

    Lower-is-better sets are negated first. Min-max sends the probe's worst
    subject to 0 and best to 1; a constant set carries no opinion and maps
    to all 0.5.
    """
    if raw.subject_ids.size < 2:
        raise ValueError("normalization needs at least 2 subjects")
    if not np.all(np.isfinite(raw.scores)):
        raise ValueError("raw scores must all be finite")
    order = np.argsort(raw.subject_ids, kind="stable")
    vals = raw.scores[order].astype(np.float64)
    if raw.polarity == LOWER:
        vals = -vals
    if mode == MINMAX:
        span = vals.max() - vals.min()
        if span == 0.0:
            scaled = np.full_like(vals, 0.5)
        else:
            scaled = (vals - vals.min()) / span
    elif mode == ZSCORE:
        std = vals.std()
        if std == 0.0:
            scaled = np.full_like(vals, 0.5)
        else:
            scaled = (vals - vals.mean()) / std
    else:
        raise ValueError(f"mode must be one of {MODES}")
    return NormalizedScoreSet(scaled, raw.subject_ids[order],
                              raw.classifier_id, mode)


def fuse_mean(sets: Sequence[NormalizedScoreSet]) -> tuple[int, NormalizedScoreSet]:
    """Element-wise mean opinion; prediction = argmax, lowest id on ties."""
    if not sets:
        raise ValueError("fusion needs at least one score set")
    first = sets[0]
    for s in sets[1:]:
        if s.scores.size != first.scores.size:
            raise ValueError("score sets have mismatched lengths")
        if not np.array_equal(s.subject_ids, first.subject_ids):
            raise ValueError("score sets cover different subjects")
        if s.mode != first.mode:
            raise ValueError("score sets use different normalization modes")
    fused_scores = np.mean([s.scores for s in sets], axis=0)
    fused = NormalizedScoreSet(fused_scores, first.subject_ids.copy(),
                               "fusion:" + "+".join(s.classifier_id for s in sets),
                               first.mode)
    return fused.best_subject(), fused


def write_fusion_report(rows: Sequence[tuple[str, int, int, float]],
                        path: str | Path) -> None:
    """CSV of per-probe fusion outcomes: probe, truth, prediction, top score."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["probe", "subject_true", "subject_pred", "fused_score"])
        for probe, true_id, pred_id, score in rows:
            writer.writerow([probe, true_id, pred_id, repr(float(score))])
