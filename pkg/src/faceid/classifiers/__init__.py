"""Identification back ends: nearest neighbor, MLP, PNN, and incremental RBF."""

from .common import (
    Gallery,
    ScoreSet,
    HIGHER,
    LOWER,
    STD_FLOOR,
    make_targets,
)
from .nearest import MAD, MSE, METRICS, mad, mse_dist, nn_classify, nn_classify_batch, nn_scores
from .mlp import (
    DivergenceError,
    MLPConfig,
    MLPModel,
    mlp_classify,
    mlp_gradient,
    mlp_scores,
    mlp_train,
    msereg_gradient,
    msereg_loss,
    pack_params,
    unpack_params,
    write_training_log,
)
from .pnn import PNNModel, pnn_classify, pnn_train, radbas_bias
from .rbf import RBFModel, rbf_classify, rbf_scores, rbf_train
from .store import load_model, save_model

__all__ = [
    "Gallery", "ScoreSet", "HIGHER", "LOWER", "STD_FLOOR", "make_targets",
    "MAD", "MSE", "METRICS", "mad", "mse_dist",
    "nn_classify", "nn_classify_batch", "nn_scores",
    "DivergenceError", "MLPConfig", "MLPModel",
    "mlp_classify", "mlp_gradient", "mlp_scores", "mlp_train",
    "msereg_gradient", "msereg_loss", "pack_params", "unpack_params",
    "write_training_log",
    "PNNModel", "pnn_classify", "pnn_train", "radbas_bias",
    "RBFModel", "rbf_classify", "rbf_scores", "rbf_train",
    "load_model", "save_model",
]
