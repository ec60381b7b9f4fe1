"""Naive antibiogram baseline: resistance probability by lookup.

The model memorizes the resistant fraction per anti-organism cell over its
fit rows and predicts that fraction for any row with the same key. Keys
never seen during fitting fall back to the overall resistant fraction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import FitError
from ..features import FeatureMatrix


@dataclass
class AntibiogramModel:
    kind = "antibiogram"
    cell_rates: dict[str, float]
    global_rate: float

    def predict(self, matrix: FeatureMatrix) -> np.ndarray:
        return np.array(
            [self.cell_rates.get(key, self.global_rate) for key in matrix.ao_keys]
        )


def fit_antibiogram(matrix: FeatureMatrix) -> AntibiogramModel:
    """Percentage resistance per anti-organism cell over the given rows."""
    if matrix.n_rows == 0:
        raise FitError("cannot fit antibiogram on zero rows")
    totals: dict[str, int] = {}
    resistant: dict[str, int] = {}
    for key, label in zip(matrix.ao_keys, matrix.labels):
        totals[key] = totals.get(key, 0) + 1
        resistant[key] = resistant.get(key, 0) + int(label)
    cell_rates = {key: resistant[key] / totals[key] for key in sorted(totals)}
    return AntibiogramModel(
        cell_rates=cell_rates,
        global_rate=float(np.mean(matrix.labels)),
    )
