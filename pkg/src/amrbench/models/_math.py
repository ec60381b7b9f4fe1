"""Small numeric helpers shared by the learners."""
from __future__ import annotations

import numpy as np

# |z| <= 36 keeps sigmoid strictly inside (0,1) in float64.
_LOGIT_CLIP = 36.0


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def sigmoid_proba(z: np.ndarray) -> np.ndarray:
    """Sigmoid clipped into the open interval (0,1) for reported scores."""
    return sigmoid(np.clip(z, -_LOGIT_CLIP, _LOGIT_CLIP))


def log_loss_from_margin(margin: np.ndarray, y: np.ndarray) -> float:
    """Mean logistic loss given raw margins, computed in a stable form."""
    # softplus(z) - y*z, with softplus(z) = max(z,0) + log1p(exp(-|z|))
    softplus = np.maximum(margin, 0.0) + np.log1p(np.exp(-np.abs(margin)))
    return float(np.mean(softplus - y * margin))
