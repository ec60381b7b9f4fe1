"""Averaging ensemble over the neural network, GBM and random forest."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..features import FeatureMatrix

ENSEMBLE_MEMBER_KINDS = ("mlp", "gbm", "random_forest")


@dataclass
class EnsembleModel:
    kind = "ensemble"
    members: dict[str, object]  # kind tag -> fitted member

    def predict(self, matrix: FeatureMatrix) -> np.ndarray:
        scores = [member.predict(matrix) for member in self.members.values()]
        return np.mean(scores, axis=0)


def ensemble_average(members: list) -> EnsembleModel:
    """Unweighted mean of exactly the three member families."""
    if len(members) != 3:
        raise ConfigError(f"ensemble needs exactly 3 members, got {len(members)}")
    by_kind = {member.kind: member for member in members}
    if set(by_kind) != set(ENSEMBLE_MEMBER_KINDS):
        raise ConfigError(
            f"ensemble members must be {ENSEMBLE_MEMBER_KINDS}, got {sorted(by_kind)}"
        )
    return EnsembleModel(members={kind: by_kind[kind] for kind in ENSEMBLE_MEMBER_KINDS})
