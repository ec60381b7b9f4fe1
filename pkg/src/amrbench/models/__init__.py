"""Model families: antibiogram baseline, four learners, and the ensemble."""

from .antibiogram import AntibiogramModel, fit_antibiogram
from .ensemble import EnsembleModel, ensemble_average
from .forest import RandomForestModel, RandomForestParams, fit_random_forest
from .gbm import GbmModel, GbmParams, fit_gbm
from .linear import (
    LinearModel,
    fit_l1_logistic,
    kkt_violation,
    l1_objective,
    soft_threshold,
)
from .mlp import MlpModel, MlpParams, fit_mlp, init_parameters, loss_and_gradients
from .serialize import load_model, model_from_dict, model_to_dict, save_model
from .tuning import TuningResult, tune_hyperparameters

__all__ = [
    "AntibiogramModel",
    "EnsembleModel",
    "GbmModel",
    "GbmParams",
    "LinearModel",
    "MlpModel",
    "MlpParams",
    "RandomForestModel",
    "RandomForestParams",
    "TuningResult",
    "ensemble_average",
    "fit_antibiogram",
    "fit_gbm",
    "fit_l1_logistic",
    "fit_mlp",
    "fit_random_forest",
    "init_parameters",
    "kkt_violation",
    "l1_objective",
    "load_model",
    "loss_and_gradients",
    "model_from_dict",
    "model_to_dict",
    "save_model",
    "soft_threshold",
    "tune_hyperparameters",
]
