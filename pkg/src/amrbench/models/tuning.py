"""Grid search: fit on the training fold, score AUC on the validation fold."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

from ..errors import ConfigError
from ..eval import auc
from ..features import FeatureMatrix

logger = logging.getLogger(__name__)


@dataclass
class TuningResult:
    best_params: dict
    best_model: object
    best_auc: float
    table: list[tuple[dict, float]] = field(default_factory=list)


def tune_hyperparameters(
    fit_fn: Callable[[FeatureMatrix, dict], object],
    grid: Sequence[dict],
    train: FeatureMatrix,
    validation: FeatureMatrix,
) -> TuningResult:
    """Return the grid point with the highest validation AUC.

    Models are only ever fitted on ``train``; ties keep the earliest grid
    point so reruns are reproducible.
    """
    if not grid:
        raise ConfigError("hyperparameter grid is empty")
    best: TuningResult | None = None
    table = []
    for point in grid:
        model = fit_fn(train, point)
        score = auc(model.predict(validation), validation.labels)
        table.append((point, score))
        logger.debug("grid point %s -> validation AUC %.4f", point, score)
        if best is None or score > best.best_auc:
            best = TuningResult(best_params=point, best_model=model, best_auc=score)
    best.table = table
    return best
