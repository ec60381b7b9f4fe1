"""Gradient boosting on logistic loss with leaf-wise tree growth.

Each round fits a regression tree to the loss gradients, always splitting
whichever current leaf offers the largest second-order loss reduction until
the leaf budget or the minimum-samples constraint binds. Leaf values are a
single Newton step with an additive regularizer on the Hessian sum. A
step-halving safeguard keeps the recorded training loss non-increasing
round over round.
"""
from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import DimensionError, FitError
from ..features import FeatureMatrix
from ._math import log_loss_from_margin, sigmoid, sigmoid_proba
from ._tree import (
    BinnedDataset,
    TreeNode,
    best_split_newton,
    bin_matrix,
    fit_bin_edges,
    partition,
    predict_tree,
)

logger = logging.getLogger(__name__)


@dataclass
class GbmParams:
    n_rounds: int = 100
    max_leaves: int = 31
    min_samples_leaf: int = 20
    learning_rate: float = 0.1
    hessian_reg: float = 1.0
    feature_fraction: float = 1.0
    max_bins: int = 64


@dataclass
class GbmModel:
    kind = "gbm"
    params: GbmParams
    seed: int
    base_score: float
    trees: list[TreeNode]
    n_features: int
    feature_names: list[str] = field(default_factory=list)
    train_losses: list[float] = field(default_factory=list)  # loss after each round, round 0 first

    def decision(self, X: np.ndarray) -> np.ndarray:
        if X.shape[1] != self.n_features:
            raise DimensionError(
                f"model expects {self.n_features} features, rows have {X.shape[1]}"
            )
        margin = np.full(X.shape[0], self.base_score)
        for tree in self.trees:
            margin += self.params.learning_rate * predict_tree(tree, X)
        return margin

    def predict(self, matrix: FeatureMatrix) -> np.ndarray:
        return sigmoid_proba(self.decision(matrix.rows))


@dataclass(order=True)
class _Candidate:
    sort_key: tuple
    node: TreeNode = field(compare=False)
    idx: np.ndarray = field(compare=False)
    split: object = field(compare=False)


def _leaf_value(grad: np.ndarray, hess: np.ndarray, idx: np.ndarray, reg: float) -> float:
    return float(-grad[idx].sum() / (hess[idx].sum() + reg))


def _build_tree(
    data: BinnedDataset,
    grad: np.ndarray,
    hess: np.ndarray,
    features: np.ndarray,
    params: GbmParams,
) -> tuple[TreeNode, list[tuple[TreeNode, np.ndarray]]]:
    """Grow one tree leaf-wise; returns the root and the final leaf row sets."""
    all_idx = np.arange(data.binned.shape[0])
    root = TreeNode(n_samples=all_idx.size)
    counter = 0

    def candidate(node: TreeNode, idx: np.ndarray) -> Optional[_Candidate]:
        nonlocal counter
        split = best_split_newton(
            data, grad, hess, idx, features, params.min_samples_leaf, params.hessian_reg
        )
        if split is None:
            return None
        counter += 1
        return _Candidate(sort_key=(-split.gain, counter), node=node, idx=idx, split=split)

    heap: list[_Candidate] = []
    first = candidate(root, all_idx)
    if first is not None:
        heapq.heappush(heap, first)
    leaves: dict[int, tuple[TreeNode, np.ndarray]] = {id(root): (root, all_idx)}

    while heap and len(leaves) < params.max_leaves:
        best = heapq.heappop(heap)
        node, idx, split = best.node, best.idx, best.split
        del leaves[id(node)]
        left_idx, right_idx = partition(data, idx, split)
        node.feature = split.feature
        node.threshold = split.threshold
        node.left = TreeNode(n_samples=left_idx.size)
        node.right = TreeNode(n_samples=right_idx.size)
        for child, child_idx in ((node.left, left_idx), (node.right, right_idx)):
            leaves[id(child)] = (child, child_idx)
            cand = candidate(child, child_idx)
            if cand is not None:
                heapq.heappush(heap, cand)

    leaf_list = list(leaves.values())
    for leaf, idx in leaf_list:
        leaf.value = _leaf_value(grad, hess, idx, params.hessian_reg)
    return root, leaf_list


def fit_gbm(
    matrix: FeatureMatrix,
    params: GbmParams | None = None,
    seed: int = 0,
) -> GbmModel:
    params = params or GbmParams()
    X = matrix.rows
    y = matrix.labels.astype(float)
    n, d = X.shape
    if n == 0:
        raise FitError("cannot fit on zero rows")
    prevalence = float(y.mean())
    if prevalence <= 0.0 or prevalence >= 1.0:
        raise FitError("GBM requires both classes in the training rows")

    base_score = float(np.log(prevalence / (1.0 - prevalence)))
    edges = fit_bin_edges(X, params.max_bins)
    data = BinnedDataset(binned=bin_matrix(X, edges), edges=edges)

    margin = np.full(n, base_score)
    losses = [log_loss_from_margin(margin, y)]
    trees: list[TreeNode] = []
    sequences = np.random.SeedSequence(seed).spawn(max(params.n_rounds, 1))

    for round_index in range(params.n_rounds):
        p = sigmoid(margin)
        grad = p - y
        hess = p * (1.0 - p)
        if params.feature_fraction < 1.0:
            rng = np.random.default_rng(sequences[round_index])
            k = max(1, int(round(params.feature_fraction * d)))
            features = np.sort(rng.choice(d, size=k, replace=False))
        else:
            features = np.arange(d)

        tree, leaf_list = _build_tree(data, grad, hess, features, params)

        delta = np.zeros(n)
        for leaf, idx in leaf_list:
            delta[idx] = leaf.value
        previous = losses[-1]
        scale = 1.0
        loss = log_loss_from_margin(margin + params.learning_rate * scale * delta, y)
        halvings = 0
        while loss > previous and halvings < 30:
            scale *= 0.5
            halvings += 1
            loss = log_loss_from_margin(margin + params.learning_rate * scale * delta, y)
        if loss > previous:
            # Give up on the round rather than let the loss climb.
            scale = 0.0
            loss = previous
            logger.warning("GBM round %d discarded (no loss-reducing step)", round_index)
        if scale != 1.0:
            for leaf, _idx in leaf_list:
                leaf.value *= scale
        margin += params.learning_rate * scale * delta
        losses.append(loss)
        trees.append(tree)

    return GbmModel(
        params=params,
        seed=seed,
        base_score=base_score,
        trees=trees,
        n_features=d,
        feature_names=list(matrix.column_names),
        train_losses=losses,
    )
