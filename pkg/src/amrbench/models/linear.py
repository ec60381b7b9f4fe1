"""L1-regularized logistic regression fit by cyclic coordinate descent.

Objective: mean logistic loss + lambda * ||w||_1 with an unpenalized
intercept. Each coordinate takes a proximal step against the quadratic
majorizer with curvature mean(x_j^2)/4 (the logistic Hessian bound), which
soft-thresholds the coordinate and never increases the objective.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionError, FitError
from ..features import FeatureMatrix
from ._math import log_loss_from_margin, sigmoid, sigmoid_proba

logger = logging.getLogger(__name__)


def soft_threshold(value: float, threshold: float) -> float:
    if value > threshold:
        return value - threshold
    if value < -threshold:
        return value + threshold
    return 0.0


@dataclass
class LinearModel:
    kind = "l1_logistic"
    weights: np.ndarray
    intercept: float
    lam: float
    feature_names: list[str] = field(default_factory=list)
    converged: bool = True

    def decision(self, X: np.ndarray) -> np.ndarray:
        if X.shape[1] != self.weights.shape[0]:
            raise DimensionError(
                f"model expects {self.weights.shape[0]} features, rows have {X.shape[1]}"
            )
        return X @ self.weights + self.intercept

    def predict(self, matrix: FeatureMatrix) -> np.ndarray:
        return sigmoid_proba(self.decision(matrix.rows))


def l1_objective(X: np.ndarray, y: np.ndarray, weights: np.ndarray, intercept: float, lam: float) -> float:
    margin = X @ weights + intercept
    return log_loss_from_margin(margin, y) + lam * float(np.sum(np.abs(weights)))


def kkt_violation(X: np.ndarray, y: np.ndarray, weights: np.ndarray, intercept: float, lam: float) -> float:
    """Largest violation of the L1 stationarity conditions.

    Zero coordinates must satisfy |grad| <= lam, active coordinates must have
    grad + lam*sign(w) = 0, and the intercept gradient must vanish.
    """
    n = X.shape[0]
    residual = sigmoid(X @ weights + intercept) - y
    grad = X.T @ residual / n
    worst = abs(float(np.mean(residual)))
    for j in range(weights.shape[0]):
        if weights[j] == 0.0:
            worst = max(worst, max(abs(grad[j]) - lam, 0.0))
        else:
            worst = max(worst, abs(grad[j] + lam * np.sign(weights[j])))
    return worst


def fit_l1_logistic(
    matrix: FeatureMatrix,
    lam: float,
    tolerance: float = 1e-8,
    max_iterations: int = 2000,
    init: tuple[np.ndarray, float] | None = None,
) -> LinearModel:
    """Cyclic coordinate descent; stops when the per-sweep objective decrease
    falls below ``tolerance``. Returns the last iterate with a warning flag
    when the sweep budget runs out first."""
    X = matrix.rows
    y = matrix.labels.astype(float)
    n, d = X.shape
    if n == 0:
        raise FitError("cannot fit on zero rows")
    if lam <= 0:
        raise FitError(f"lambda must be positive, got {lam}")
    if y.min() == y.max():
        raise FitError("training rows contain a single class")

    if init is not None:
        weights = init[0].copy()
        intercept = float(init[1])
    else:
        weights = np.zeros(d)
        intercept = 0.0

    # Fixed majorizer curvatures: logistic second derivative is <= 1/4.
    curvature = np.maximum((X * X).mean(axis=0) / 4.0, 1e-12)
    margin = X @ weights + intercept
    objective = log_loss_from_margin(margin, y) + lam * np.sum(np.abs(weights))

    converged = False
    for sweep in range(max_iterations):
        p = sigmoid(margin)
        grad_b = float(np.mean(p - y))
        delta_b = -4.0 * grad_b  # curvature bound 1/4 for the intercept
        intercept += delta_b
        margin += delta_b

        for j in range(d):
            x_j = X[:, j]
            p = sigmoid(margin)
            grad_j = float(np.mean((p - y) * x_j))
            raw = weights[j] - grad_j / curvature[j]
            new_w = soft_threshold(raw, lam / curvature[j])
            if new_w != weights[j]:
                margin += (new_w - weights[j]) * x_j
                weights[j] = new_w

        new_objective = log_loss_from_margin(margin, y) + lam * np.sum(np.abs(weights))
        decrease = objective - new_objective
        objective = new_objective
        if 0 <= decrease < tolerance:
            converged = True
            break

    if not converged:
        logger.warning(
            "L1 logistic fit hit max_iterations=%d without converging (lambda=%g)",
            max_iterations, lam,
        )
    return LinearModel(
        weights=weights,
        intercept=intercept,
        lam=lam,
        feature_names=list(matrix.column_names),
        converged=converged,
    )
