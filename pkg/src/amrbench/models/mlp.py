"""Feed-forward network: relu hidden layers, sigmoid output, Adam updates.

Gradients are computed by explicit backprop on the logit formulation of the
binary cross-entropy, so they can be checked against finite differences.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionError, FitError
from ..features import FeatureMatrix
from ._math import log_loss_from_margin, sigmoid, sigmoid_proba


@dataclass
class MlpParams:
    hidden_sizes: tuple[int, ...] = (32,)
    max_iterations: int = 200  # epochs over the training rows
    step_size: float = 1e-3
    batch_size: int = 128
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8


@dataclass
class MlpModel:
    kind = "mlp"
    params: MlpParams
    seed: int
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    feature_names: list[str] = field(default_factory=list)

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def decision(self, X: np.ndarray) -> np.ndarray:
        if X.shape[1] != self.weights[0].shape[0]:
            raise DimensionError(
                f"model expects {self.weights[0].shape[0]} features, rows have {X.shape[1]}"
            )
        a = X
        last = len(self.weights) - 1
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ W + b
            a = np.maximum(z, 0.0) if i < last else z
        return a[:, 0]

    def predict(self, matrix: FeatureMatrix) -> np.ndarray:
        return sigmoid_proba(self.decision(matrix.rows))


def init_parameters(
    n_features: int, hidden_sizes: tuple[int, ...], rng: np.random.Generator
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """He-scaled weights for the relu layers, smaller scale for the output."""
    sizes = [n_features, *hidden_sizes, 1]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        scale = np.sqrt(2.0 / fan_in)
        weights.append(rng.normal(0.0, scale, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def loss_and_gradients(
    weights: list[np.ndarray],
    biases: list[np.ndarray],
    X: np.ndarray,
    y: np.ndarray,
) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """Mean logistic loss on logits plus its gradients for every parameter."""
    n = X.shape[0]
    last = len(weights) - 1
    activations = [X]
    pre = []
    a = X
    for i, (W, b) in enumerate(zip(weights, biases)):
        z = a @ W + b
        pre.append(z)
        a = np.maximum(z, 0.0) if i < last else z
        activations.append(a)
    logits = activations[-1][:, 0]
    loss = log_loss_from_margin(logits, y)

    delta = ((sigmoid(logits) - y) / n)[:, None]
    grad_w = [np.empty(0)] * len(weights)
    grad_b = [np.empty(0)] * len(weights)
    for i in range(last, -1, -1):
        grad_w[i] = activations[i].T @ delta
        grad_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ weights[i].T) * (pre[i - 1] > 0.0)
    return loss, grad_w, grad_b


def fit_mlp(
    matrix: FeatureMatrix,
    params: MlpParams | None = None,
    seed: int = 0,
) -> MlpModel:
    """Mini-batch Adam on the logistic loss; deterministic per seed."""
    params = params or MlpParams()
    X = matrix.rows
    y = matrix.labels.astype(float)
    n = X.shape[0]
    if n == 0:
        raise FitError("cannot fit on zero rows")
    if len(params.hidden_sizes) < 1:
        raise FitError("MLP needs at least one hidden layer")

    rng = np.random.default_rng(seed)
    weights, biases = init_parameters(X.shape[1], params.hidden_sizes, rng)
    mw = [np.zeros_like(w) for w in weights]
    vw = [np.zeros_like(w) for w in weights]
    mb = [np.zeros_like(b) for b in biases]
    vb = [np.zeros_like(b) for b in biases]

    beta1, beta2, eps = params.adam_beta1, params.adam_beta2, params.adam_eps
    step = 0
    batch = min(params.batch_size, n)
    for _epoch in range(params.max_iterations):
        order = rng.permutation(n)
        for start in range(0, n, batch):
            rows = order[start:start + batch]
            _, grad_w, grad_b = loss_and_gradients(weights, biases, X[rows], y[rows])
            step += 1
            correction1 = 1.0 - beta1 ** step
            correction2 = 1.0 - beta2 ** step
            for i in range(len(weights)):
                mw[i] = beta1 * mw[i] + (1 - beta1) * grad_w[i]
                vw[i] = beta2 * vw[i] + (1 - beta2) * grad_w[i] ** 2
                weights[i] -= params.step_size * (mw[i] / correction1) / (
                    np.sqrt(vw[i] / correction2) + eps
                )
                mb[i] = beta1 * mb[i] + (1 - beta1) * grad_b[i]
                vb[i] = beta2 * vb[i] + (1 - beta2) * grad_b[i] ** 2
                biases[i] -= params.step_size * (mb[i] / correction1) / (
                    np.sqrt(vb[i] / correction2) + eps
                )

    return MlpModel(
        params=params,
        seed=seed,
        weights=weights,
        biases=biases,
        feature_names=list(matrix.column_names),
    )
