"""Radial basis classifiers: PNN probabilities, greedy RBF design, persistence."""

import numpy as np
import pytest
from scipy.spatial.distance import cdist

from faceid.classifiers import (
    HIGHER, Gallery, MLPConfig, PNNModel, RBFModel, load_model, mlp_train,
    pnn_classify, pnn_train, radbas_bias, rbf_classify, rbf_scores,
    rbf_train, save_model,
)
from faceid.classifiers.rbf import _activations


def clustered_gallery(seed=5, n_subjects=4, per_class=3, dim=6, noise=0.3):
    rng = np.random.default_rng(seed)
    centers = rng.normal(scale=3.0, size=(n_subjects, dim))
    rows, labels = [], []
    for s, c in enumerate(centers, start=1):
        for _ in range(per_class):
            rows.append(c + rng.normal(scale=noise, size=dim))
            labels.append(s)
    return Gallery(matrix=np.stack(rows), labels=np.array(labels))


# ---------------------------------------------------------------------------
# PNN


def test_radbas_bias_half_response_at_spread():
    for spread in (0.1, 0.9, 3.0):
        b = radbas_bias(spread)
        assert np.exp(-(spread * b) ** 2) == pytest.approx(0.5)
    with pytest.raises(ValueError, match="spread"):
        radbas_bias(0.0)


def test_pnn_probabilities_hand_computed():
    # z-scored centers land at -1 and +1; probe z-scores to -1.
    # With spread 1 the activations are 2^(-d^2): [1, 1/16].
    gallery = Gallery(matrix=np.array([[0.0], [2.0]]), labels=np.array([1, 2]))
    model = pnn_train(gallery, spread=1.0)
    pred, scores = pnn_classify(model, np.array([0.0]))
    assert pred == 1
    assert scores.scores == pytest.approx([16 / 17, 1 / 17])
    assert scores.polarity == HIGHER
    assert scores.classifier_id == "pnn"


def test_pnn_scores_are_probabilities():
    gallery = clustered_gallery()
    model = pnn_train(gallery, spread=2.0)
    rng = np.random.default_rng(0)
    for _ in range(5):
        _, scores = pnn_classify(model, rng.normal(scale=3.0, size=gallery.dim))
        assert scores.scores.sum() == pytest.approx(1.0)
        assert np.all(scores.scores >= 0) and np.all(scores.scores <= 1)


def test_pnn_centers_are_zscored_gallery():
    gallery = clustered_gallery()
    model = pnn_train(gallery, spread=1.0)
    assert np.array_equal(model.centers, gallery.normalized_matrix())
    assert np.array_equal(model.labels, gallery.labels)


def test_pnn_small_spread_reduces_to_nearest_neighbor():
    gallery = clustered_gallery(seed=8)
    model = pnn_train(gallery, spread=0.2)
    z_gallery = gallery.normalized_matrix()
    rng = np.random.default_rng(1)
    for _ in range(10):
        probe = rng.normal(scale=3.0, size=gallery.dim)
        pred, _ = pnn_classify(model, probe)
        z = gallery.normalize(probe)
        nearest = int(np.argmin(np.linalg.norm(z_gallery - z, axis=1)))
        assert pred == gallery.labels[nearest]


def test_pnn_total_underflow_falls_back_to_one_hot():
    gallery = Gallery(matrix=np.array([[0.0], [1.0]]), labels=np.array([1, 2]))
    model = pnn_train(gallery, spread=1e-8)
    pred, scores = pnn_classify(model, np.array([0.1]))
    assert pred == 1
    assert np.array_equal(scores.scores, [1.0, 0.0])


def test_pnn_equidistant_tie_takes_lowest_id():
    gallery = Gallery(matrix=np.array([[-1.0], [1.0]]), labels=np.array([9, 4]))
    model = pnn_train(gallery, spread=1.0)
    pred, scores = pnn_classify(model, np.array([0.0]))
    assert scores.scores[0] == pytest.approx(scores.scores[1])
    assert pred == 4


def test_pnn_validation():
    gallery = clustered_gallery()
    with pytest.raises(ValueError, match="spread"):
        pnn_train(gallery, spread=-1.0)
    model = pnn_train(gallery, spread=1.0)
    with pytest.raises(ValueError, match="dim"):
        pnn_classify(model, np.zeros(99))


# ---------------------------------------------------------------------------
# RBF


def test_activations_match_closed_form():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(5, 3))
    centers = rng.normal(size=(4, 3))
    spread = 1.0
    got = _activations(x, centers, spread)
    # b^2 = ln2 at spread 1, so the response is exactly 2^(-d^2)
    d = cdist(x, centers)
    assert np.abs(got - np.power(2.0, -(d ** 2))).max() < 1e-12
    assert _activations(x, np.zeros((0, 3)), spread).shape == (5, 0)


def test_rbf_residuals_monotone_nonincreasing():
    gallery = clustered_gallery(seed=11)
    model = rbf_train(gallery, spread=1.5, max_centers=gallery.size)
    assert model.residuals.size == gallery.size
    assert np.all(np.diff(model.residuals) <= 1e-9)


def test_rbf_full_design_interpolates():
    # one center per training vector: n rows, n+1 free columns, exact fit
    gallery = clustered_gallery(seed=2, n_subjects=3, per_class=3)
    model = rbf_train(gallery, spread=1.0, max_centers=gallery.size)
    assert model.residuals[-1] < 1e-6
    for row, label in zip(gallery.matrix, gallery.labels):
        pred, _ = rbf_classify(model, row)
        assert pred == label


def test_rbf_greedy_matches_bruteforce_oracle():
    """Re-run the growth loop with independently computed pieces."""
    gallery = clustered_gallery(seed=13, n_subjects=3, per_class=4, dim=5)
    spread = 1.2
    model = rbf_train(gallery, spread=spread, max_centers=6)

    x = gallery.normalized_matrix()
    targets = np.where(gallery.labels[:, None] == gallery.subject_ids[None, :], 1.0, -1.0)
    b = np.sqrt(np.log(2.0)) / spread
    acts_full = np.exp(-(cdist(x, x) * b) ** 2)

    def fit(cols):
        design = np.hstack([acts_full[:, cols], np.ones((x.shape[0], 1))])
        coef = np.linalg.pinv(design) @ targets
        return design @ coef

    chosen = []
    for _ in range(6):
        errs = ((fit(chosen) - targets) ** 2).sum(axis=1)
        errs[chosen] = -np.inf
        chosen.append(int(np.argmax(errs)))
    assert model.center_indices.tolist() == chosen
    assert np.array_equal(model.centers, x[chosen])


def test_rbf_first_pick_is_index_zero_on_balanced_classes():
    # bias-only start leaves every row with the same error on balanced targets
    gallery = clustered_gallery(seed=1, n_subjects=3, per_class=2)
    model = rbf_train(gallery, spread=1.0, max_centers=3)
    assert model.center_indices[0] == 0
    assert len(set(model.center_indices.tolist())) == 3


def test_rbf_zero_weights_score_is_bias():
    model = RBFModel(centers=np.zeros((2, 3)), spread=1.0,
                     weights=np.zeros((2, 2)), biases=np.array([0.7, -0.1]),
                     subject_ids=np.array([1, 2]),
                     norm_mean=np.zeros(3), norm_std=np.ones(3))
    scores = rbf_scores(model, np.array([5.0, 5.0, 5.0]))
    assert np.array_equal(scores.scores, [0.7, -0.1])
    assert scores.classifier_id == "rbf"


def test_rbf_scores_match_manual_forward_pass():
    gallery = clustered_gallery(seed=6)
    model = rbf_train(gallery, spread=1.0, max_centers=5)
    probe = gallery.matrix[4]
    z = (probe - model.norm_mean) / model.norm_std
    acts = np.exp(-(np.linalg.norm(model.centers - z, axis=1) * radbas_bias(1.0)) ** 2)
    want = model.weights @ acts + model.biases
    got = rbf_scores(model, probe)
    assert np.abs(got.scores - want).max() < 1e-12


def test_rbf_validation():
    gallery = clustered_gallery()
    with pytest.raises(ValueError, match="spread"):
        rbf_train(gallery, spread=0.0)
    with pytest.raises(ValueError, match="max_centers"):
        rbf_train(gallery, spread=1.0, max_centers=0)
    with pytest.raises(ValueError, match="max_centers"):
        rbf_train(gallery, spread=1.0, max_centers=gallery.size + 1)


# ---------------------------------------------------------------------------
# Persistence


def assert_arrays_equal(a, b, names):
    for name in names:
        assert np.array_equal(getattr(a, name), getattr(b, name)), name


def test_store_roundtrip_mlp(tmp_path):
    gallery = clustered_gallery(per_class=2)
    model = mlp_train(gallery, MLPConfig(hidden=4, epochs=40, seed=3))
    path = tmp_path / "m.npz"
    save_model(model, path)
    back = load_model(path)
    assert_arrays_equal(model, back, ["w1", "b1", "w2", "b2", "subject_ids",
                                      "norm_mean", "norm_std", "curve"])
    assert back.config == model.config


def test_store_roundtrip_pnn(tmp_path):
    model = pnn_train(clustered_gallery(), spread=0.7)
    path = tmp_path / "p.npz"
    save_model(model, path)
    back = load_model(path)
    assert_arrays_equal(model, back, ["centers", "labels", "subject_ids",
                                      "norm_mean", "norm_std"])
    assert back.spread == model.spread


def test_store_roundtrip_rbf(tmp_path):
    model = rbf_train(clustered_gallery(), spread=1.3, max_centers=4)
    path = tmp_path / "r.npz"
    save_model(model, path)
    back = load_model(path)
    assert_arrays_equal(model, back, ["centers", "weights", "biases", "subject_ids",
                                      "norm_mean", "norm_std", "center_indices",
                                      "residuals"])
    assert back.spread == model.spread


def test_store_rejects_unknown_type(tmp_path):
    with pytest.raises(TypeError):
        save_model(object(), tmp_path / "x.npz")


def test_store_rejects_future_version(tmp_path):
    path = tmp_path / "v.npz"
    np.savez(path, format_version=99, kind="pnn")
    with pytest.raises(ValueError, match="version"):
        load_model(path)


def test_loaded_models_predict_identically(tmp_path):
    gallery = clustered_gallery(seed=30)
    probe = np.random.default_rng(2).normal(scale=3.0, size=gallery.dim)
    for trained, fname in ((pnn_train(gallery, 1.1), "a.npz"),
                           (rbf_train(gallery, 1.1, max_centers=5), "b.npz")):
        save_model(trained, tmp_path / fname)
        loaded = load_model(tmp_path / fname)
        if isinstance(trained, PNNModel):
            assert pnn_classify(trained, probe)[0] == pnn_classify(loaded, probe)[0]
        else:
            assert np.array_equal(rbf_scores(trained, probe).scores,
                                  rbf_scores(loaded, probe).scores)
