"""Versioned JSON serialization for every model family.

Rates and weights are stored as decimal strings with 17 significant digits,
which round-trips IEEE doubles bit-exactly.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from ._tree import TreeNode
from .antibiogram import AntibiogramModel
from .ensemble import ENSEMBLE_MEMBER_KINDS, EnsembleModel
from .forest import RandomForestModel, RandomForestParams
from .gbm import GbmModel, GbmParams
from .linear import LinearModel
from .mlp import MlpModel, MlpParams

MODEL_FORMAT_VERSION = 1


def _enc(value: float) -> str:
    return format(float(value), ".17g")


def _enc_array(values) -> list:
    arr = np.asarray(values)
    if arr.ndim == 1:
        return [_enc(v) for v in arr]
    return [_enc_array(row) for row in arr]


def _dec_array(values) -> np.ndarray:
    return np.asarray(values, dtype=float)


def model_to_dict(model) -> dict:
    payload = {"format_version": MODEL_FORMAT_VERSION, "kind": model.kind}
    if isinstance(model, AntibiogramModel):
        payload["cell_rates"] = {k: _enc(v) for k, v in sorted(model.cell_rates.items())}
        payload["global_rate"] = _enc(model.global_rate)
    elif isinstance(model, LinearModel):
        payload["lambda"] = _enc(model.lam)
        payload["intercept"] = _enc(model.intercept)
        payload["weights"] = _enc_array(model.weights)
        payload["feature_names"] = model.feature_names
        payload["converged"] = model.converged
    elif isinstance(model, RandomForestModel):
        payload["hyperparameters"] = {
            "n_trees": model.params.n_trees,
            "max_depth": model.params.max_depth,
            "min_samples_leaf": model.params.min_samples_leaf,
            "feature_subsample": model.params.feature_subsample,
            "max_bins": model.params.max_bins,
        }
        payload["seed"] = model.seed
        payload["n_features"] = model.n_features
        payload["feature_names"] = model.feature_names
        payload["trees"] = [tree.to_dict() for tree in model.trees]
    elif isinstance(model, GbmModel):
        payload["hyperparameters"] = {
            "n_rounds": model.params.n_rounds,
            "max_leaves": model.params.max_leaves,
            "min_samples_leaf": model.params.min_samples_leaf,
            "learning_rate": _enc(model.params.learning_rate),
            "hessian_reg": _enc(model.params.hessian_reg),
            "feature_fraction": _enc(model.params.feature_fraction),
            "max_bins": model.params.max_bins,
        }
        payload["seed"] = model.seed
        payload["base_score"] = _enc(model.base_score)
        payload["n_features"] = model.n_features
        payload["feature_names"] = model.feature_names
        payload["trees"] = [tree.to_dict() for tree in model.trees]
    elif isinstance(model, MlpModel):
        payload["hyperparameters"] = {
            "hidden_sizes": list(model.params.hidden_sizes),
            "max_iterations": model.params.max_iterations,
            "step_size": _enc(model.params.step_size),
            "batch_size": model.params.batch_size,
        }
        payload["seed"] = model.seed
        payload["weights"] = [_enc_array(w) for w in model.weights]
        payload["biases"] = [_enc_array(b) for b in model.biases]
        payload["feature_names"] = model.feature_names
    elif isinstance(model, EnsembleModel):
        payload["members"] = {
            kind: model_to_dict(model.members[kind]) for kind in ENSEMBLE_MEMBER_KINDS
        }
    else:
        raise ConfigError(f"cannot serialize model of type {type(model).__name__}")
    return payload


def model_from_dict(payload: dict):
    kind = payload.get("kind")
    if kind == "antibiogram":
        return AntibiogramModel(
            cell_rates={k: float(v) for k, v in payload["cell_rates"].items()},
            global_rate=float(payload["global_rate"]),
        )
    if kind == "l1_logistic":
        return LinearModel(
            weights=_dec_array(payload["weights"]),
            intercept=float(payload["intercept"]),
            lam=float(payload["lambda"]),
            feature_names=list(payload.get("feature_names", [])),
            converged=payload.get("converged", True),
        )
    if kind == "random_forest":
        hp = payload["hyperparameters"]
        params = RandomForestParams(
            n_trees=hp["n_trees"],
            max_depth=hp["max_depth"],
            min_samples_leaf=hp["min_samples_leaf"],
            feature_subsample=hp["feature_subsample"],
            max_bins=hp["max_bins"],
        )
        return RandomForestModel(
            params=params,
            seed=payload["seed"],
            trees=[TreeNode.from_dict(t) for t in payload["trees"]],
            n_features=payload["n_features"],
            feature_names=list(payload.get("feature_names", [])),
        )
    if kind == "gbm":
        hp = payload["hyperparameters"]
        params = GbmParams(
            n_rounds=hp["n_rounds"],
            max_leaves=hp["max_leaves"],
            min_samples_leaf=hp["min_samples_leaf"],
            learning_rate=float(hp["learning_rate"]),
            hessian_reg=float(hp["hessian_reg"]),
            feature_fraction=float(hp["feature_fraction"]),
            max_bins=hp["max_bins"],
        )
        return GbmModel(
            params=params,
            seed=payload["seed"],
            base_score=float(payload["base_score"]),
            trees=[TreeNode.from_dict(t) for t in payload["trees"]],
            n_features=payload["n_features"],
            feature_names=list(payload.get("feature_names", [])),
        )
    if kind == "mlp":
        hp = payload["hyperparameters"]
        params = MlpParams(
            hidden_sizes=tuple(hp["hidden_sizes"]),
            max_iterations=hp["max_iterations"],
            step_size=float(hp["step_size"]),
            batch_size=hp["batch_size"],
        )
        return MlpModel(
            params=params,
            seed=payload["seed"],
            weights=[_dec_array(w) for w in payload["weights"]],
            biases=[_dec_array(b) for b in payload["biases"]],
            feature_names=list(payload.get("feature_names", [])),
        )
    if kind == "ensemble":
        members = [model_from_dict(payload["members"][k]) for k in ENSEMBLE_MEMBER_KINDS]
        return EnsembleModel(members={m.kind: m for m in members})
    raise ConfigError(f"unknown model kind {kind!r} in model file")


def save_model(model, path: str | Path, header: dict | None = None) -> None:
    payload = model_to_dict(model)
    if header:
        payload = {"header": header, **payload}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=False)
        fh.write("\n")


def load_model(path: str | Path):
    with open(path) as fh:
        return model_from_dict(json.load(fh))
