"""Histogram-based binary decision tree machinery shared by RF and GBM.

Features are pre-binned once per fit (midpoints between observed values, or
quantile edges past ``max_bins`` distinct values), so each split search is a
couple of bincounts plus a vectorized scan over bin boundaries. Ties on gain
resolve to the lowest feature index, then the lowest threshold, which keeps
tree construction fully deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass
class TreeNode:
    feature: int = -1  # -1 marks a leaf
    threshold: float = 0.0
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None
    value: float = 0.0
    n_samples: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"value": format(self.value, ".17g"), "n": self.n_samples}
        return {
            "feature": self.feature,
            "threshold": format(self.threshold, ".17g"),
            "n": self.n_samples,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "TreeNode":
        if "feature" not in payload:
            return cls(value=float(payload["value"]), n_samples=payload.get("n", 0))
        return cls(
            feature=payload["feature"],
            threshold=float(payload["threshold"]),
            n_samples=payload.get("n", 0),
            left=cls.from_dict(payload["left"]),
            right=cls.from_dict(payload["right"]),
        )


def predict_tree(node: TreeNode, X: np.ndarray) -> np.ndarray:
    """Route all rows down the tree at once."""
    out = np.empty(X.shape[0])
    stack = [(node, np.arange(X.shape[0]))]
    while stack:
        current, idx = stack.pop()
        if idx.size == 0:
            continue
        if current.is_leaf:
            out[idx] = current.value
            continue
        goes_left = X[idx, current.feature] <= current.threshold
        stack.append((current.left, idx[goes_left]))
        stack.append((current.right, idx[~goes_left]))
    return out


def fit_bin_edges(X: np.ndarray, max_bins: int = 64) -> list[np.ndarray]:
    """Per-feature candidate thresholds (left branch takes x <= edge)."""
    edges = []
    for j in range(X.shape[1]):
        uniques = np.unique(X[:, j])
        if uniques.size <= 1:
            edges.append(np.empty(0))
        elif uniques.size <= max_bins:
            edges.append((uniques[:-1] + uniques[1:]) / 2.0)
        else:
            qs = np.quantile(X[:, j], np.arange(1, max_bins) / max_bins)
            edges.append(np.unique(qs))
    return edges


def bin_matrix(X: np.ndarray, edges: list[np.ndarray]) -> np.ndarray:
    """Bin index per cell; x <= edges[j][k] iff bin <= k."""
    binned = np.empty(X.shape, dtype=np.int64)
    for j, e in enumerate(edges):
        binned[:, j] = np.searchsorted(e, X[:, j], side="left")
    return binned


@dataclass
class BinnedDataset:
    binned: np.ndarray
    edges: list[np.ndarray]
    n_bins: int = field(init=False)

    def __post_init__(self):
        self.n_bins = max((e.size for e in self.edges), default=0) + 1


def _histograms(
    binned: np.ndarray,
    idx: np.ndarray,
    features: np.ndarray,
    n_bins: int,
    weight_arrays: list[np.ndarray],
) -> list[np.ndarray]:
    """Per (feature, bin) totals: row counts first, then each weight array."""
    sub = binned[np.ix_(idx, features)]
    flat = (sub + np.arange(features.size) * n_bins).ravel()
    size = features.size * n_bins
    hists = [np.bincount(flat, minlength=size).reshape(features.size, n_bins).astype(float)]
    for w in weight_arrays:
        wrep = np.repeat(w[idx], features.size)
        hists.append(np.bincount(flat, weights=wrep, minlength=size).reshape(features.size, n_bins))
    return hists


def _candidate_mask(edges: list[np.ndarray], features: np.ndarray, n_bins: int) -> np.ndarray:
    mask = np.zeros((features.size, n_bins - 1), dtype=bool)
    for row, f in enumerate(features):
        mask[row, : edges[f].size] = True
    return mask


@dataclass
class Split:
    feature: int
    threshold: float
    bin_index: int
    gain: float


def _pick_best(gains: np.ndarray, valid: np.ndarray, features: np.ndarray, edges: list[np.ndarray]) -> Optional[Split]:
    gains = np.where(valid, gains, -np.inf)
    if not np.isfinite(gains).any():
        return None
    flat = int(np.argmax(gains))  # first occurrence: lowest feature row, then bin
    row, k = divmod(flat, gains.shape[1])
    gain = float(gains[row, k])
    if gain <= 0.0:
        return None
    f = int(features[row])
    return Split(feature=f, threshold=float(edges[f][k]), bin_index=k, gain=gain)


def best_split_gini(
    data: BinnedDataset,
    y: np.ndarray,
    idx: np.ndarray,
    features: np.ndarray,
    min_samples_leaf: int,
) -> Optional[Split]:
    """Largest Gini impurity decrease over the candidate features."""
    counts, pos = _histograms(data.binned, idx, features, data.n_bins, [y])
    n = idx.size
    n_pos = float(pos.sum(axis=1)[0]) if features.size else 0.0
    cum_n = np.cumsum(counts, axis=1)[:, :-1]
    cum_pos = np.cumsum(pos, axis=1)[:, :-1]
    n_left = cum_n
    n_right = n - cum_n
    valid = (n_left >= min_samples_leaf) & (n_right >= min_samples_leaf)
    valid &= _candidate_mask(data.edges, features, data.n_bins)
    with np.errstate(divide="ignore", invalid="ignore"):
        p_left = cum_pos / n_left
        p_right = (n_pos - cum_pos) / n_right
        gini_left = 2.0 * p_left * (1.0 - p_left)
        gini_right = 2.0 * p_right * (1.0 - p_right)
        p_parent = n_pos / n
        parent = 2.0 * p_parent * (1.0 - p_parent)
        gains = parent - (n_left * gini_left + n_right * gini_right) / n
    gains = np.nan_to_num(gains, nan=-np.inf)
    return _pick_best(gains, valid, features, data.edges)


def best_split_newton(
    data: BinnedDataset,
    grad: np.ndarray,
    hess: np.ndarray,
    idx: np.ndarray,
    features: np.ndarray,
    min_samples_leaf: int,
    hessian_reg: float,
) -> Optional[Split]:
    """Largest second-order loss reduction (boosting gain) over candidates."""
    counts, g_hist, h_hist = _histograms(data.binned, idx, features, data.n_bins, [grad, hess])
    g_total = float(g_hist.sum(axis=1)[0]) if features.size else 0.0
    h_total = float(h_hist.sum(axis=1)[0]) if features.size else 0.0
    cum_n = np.cumsum(counts, axis=1)[:, :-1]
    cum_g = np.cumsum(g_hist, axis=1)[:, :-1]
    cum_h = np.cumsum(h_hist, axis=1)[:, :-1]
    valid = (cum_n >= min_samples_leaf) & ((idx.size - cum_n) >= min_samples_leaf)
    valid &= _candidate_mask(data.edges, features, data.n_bins)
    g_right = g_total - cum_g
    h_right = h_total - cum_h
    parent_score = g_total * g_total / (h_total + hessian_reg)
    gains = 0.5 * (
        cum_g * cum_g / (cum_h + hessian_reg)
        + g_right * g_right / (h_right + hessian_reg)
        - parent_score
    )
    return _pick_best(gains, valid, features, data.edges)


def partition(data: BinnedDataset, idx: np.ndarray, split: Split) -> tuple[np.ndarray, np.ndarray]:
    goes_left = data.binned[idx, split.feature] <= split.bin_index
    return idx[goes_left], idx[~goes_left]
