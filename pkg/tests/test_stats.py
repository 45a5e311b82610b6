"""Per-class moments and discriminability ranking."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from faceid.stats import (
    ClassFeatureStats, class_stats, discriminability, rank_features,
    write_ranking_csv,
)
from faceid.transforms import FeatureVector


def test_class_stats_population_moments():
    stats = class_stats([1.0, 2.0, 3.0, 4.0])
    assert stats.mean == pytest.approx(2.5)
    assert stats.variance == pytest.approx(1.25)  # 1/N, not 1/(N-1)
    assert stats.count == 4


def test_class_stats_empty():
    with pytest.raises(ValueError, match="nonempty"):
        class_stats([])


def test_discriminability_formula():
    a = ClassFeatureStats(mean=3.0, variance=2.0, count=5)
    b = ClassFeatureStats(mean=0.0, variance=2.0, count=5)
    assert discriminability(a, b, eps=0.0) == pytest.approx(1.5)
    # symmetric
    assert discriminability(b, a, eps=0.0) == pytest.approx(1.5)


def test_discriminability_eps_guards_zero_variance():
    a = ClassFeatureStats(mean=1.0, variance=0.0, count=3)
    b = ClassFeatureStats(mean=0.0, variance=0.0, count=3)
    assert np.isfinite(discriminability(a, b))
    with pytest.raises(ValueError, match="eps"):
        discriminability(a, b, eps=-1.0)


@given(shift=st.floats(min_value=0.1, max_value=100.0))
def test_discriminability_shift_invariant(shift):
    a = class_stats([1.0, 2.0, 3.0])
    b = class_stats([1.0 + shift, 2.0 + shift, 3.0 + shift])
    d = discriminability(a, b)
    assert d == pytest.approx(shift / np.sqrt(2 * a.variance + 1e-12))


def _fv(coeffs, label):
    return FeatureVector(coeffs=np.asarray(coeffs, dtype=float), source="dct", label=label)


def test_rank_features_orders_by_separation():
    # feature 0 separates the classes, feature 1 is pure noise around zero
    features = [
        _fv([0.0, 0.1], 1), _fv([0.1, -0.1], 1),
        _fv([5.0, 0.05], 2), _fv([5.1, -0.05], 2),
    ]
    ranking = rank_features(features)
    assert [idx for idx, _ in ranking] == [0, 1]
    assert ranking[0][1] > ranking[1][1]


def test_rank_features_averages_over_pairs():
    # three classes: verify the aggregate is the mean over the 3 pairs
    features = [
        _fv([0.0], 1), _fv([0.0], 1),
        _fv([1.0], 2), _fv([1.0], 2),
        _fv([3.0], 3), _fv([3.0], 3),
    ]
    (idx, score), = rank_features(features, eps=1.0)
    assert idx == 0
    want = (1.0 + 3.0 + 2.0) / 3  # |0-1|, |0-3|, |1-3| over sqrt(0+0+1)
    assert score == pytest.approx(want)


def test_rank_features_tie_breaks_by_index():
    features = [_fv([1.0, 1.0], 1), _fv([2.0, 2.0], 2)]
    ranking = rank_features(features)
    assert [idx for idx, _ in ranking] == [0, 1]
    assert ranking[0][1] == pytest.approx(ranking[1][1])


def test_rank_features_validation():
    with pytest.raises(ValueError, match="label"):
        rank_features([FeatureVector(coeffs=np.ones(2), source="dct")])
    with pytest.raises(ValueError, match="classes"):
        rank_features([_fv([1.0], 1), _fv([2.0], 1)])
    with pytest.raises(ValueError, match="mixed dims"):
        rank_features([_fv([1.0], 1), _fv([1.0, 2.0], 2)])


def test_ranking_csv(tmp_path):
    path = tmp_path / "rank.csv"
    write_ranking_csv([(3, 2.5), (0, 1.25)], path)
    lines = path.read_text().splitlines()
    assert lines[0] == "rank,feature_index,aggregate_D"
    assert lines[1] == "1,3,2.5"
    assert lines[2] == "2,0,1.25"
