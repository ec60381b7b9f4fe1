"""Random forest of Gini-split trees grown on bootstrap resamples."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionError, FitError
from ..features import FeatureMatrix
from ._tree import (
    BinnedDataset,
    TreeNode,
    best_split_gini,
    bin_matrix,
    fit_bin_edges,
    partition,
    predict_tree,
)


@dataclass
class RandomForestParams:
    n_trees: int = 100
    max_depth: int = 12
    min_samples_leaf: int = 10
    feature_subsample: str | float = "sqrt"  # "sqrt", "all", or a fraction
    max_bins: int = 64


@dataclass
class RandomForestModel:
    kind = "random_forest"
    params: RandomForestParams
    seed: int
    trees: list[TreeNode]
    n_features: int
    feature_names: list[str] = field(default_factory=list)

    def predict(self, matrix: FeatureMatrix) -> np.ndarray:
        X = matrix.rows
        if X.shape[1] != self.n_features:
            raise DimensionError(
                f"model expects {self.n_features} features, rows have {X.shape[1]}"
            )
        total = np.zeros(X.shape[0])
        for tree in self.trees:
            total += predict_tree(tree, X)
        return total / len(self.trees)


def _features_per_split(spec: str | float, d: int) -> int:
    if spec == "sqrt":
        return max(1, int(np.sqrt(d)))
    if spec == "all":
        return d
    k = max(1, int(round(float(spec) * d)))
    return min(k, d)


def _grow(
    data: BinnedDataset,
    y: np.ndarray,
    idx: np.ndarray,
    depth: int,
    params: RandomForestParams,
    k_features: int,
    rng: np.random.Generator,
) -> TreeNode:
    node_y = y[idx]
    value = float(node_y.mean())
    if (
        depth >= params.max_depth
        or idx.size < 2 * params.min_samples_leaf
        or node_y.min() == node_y.max()
    ):
        return TreeNode(value=value, n_samples=idx.size)
    features = np.sort(rng.choice(data.binned.shape[1], size=k_features, replace=False))
    split = best_split_gini(data, y, idx, features, params.min_samples_leaf)
    if split is None:
        return TreeNode(value=value, n_samples=idx.size)
    left_idx, right_idx = partition(data, idx, split)
    node = TreeNode(
        feature=split.feature,
        threshold=split.threshold,
        n_samples=idx.size,
    )
    node.left = _grow(data, y, left_idx, depth + 1, params, k_features, rng)
    node.right = _grow(data, y, right_idx, depth + 1, params, k_features, rng)
    return node


def fit_random_forest(
    matrix: FeatureMatrix,
    params: RandomForestParams | None = None,
    seed: int = 0,
) -> RandomForestModel:
    """Bootstrap + random feature subsets per split; deterministic per seed.

    ``max_depth=0`` degenerates to single-leaf trees carrying the training
    prevalence (no bootstrap noise), as does a single-row input.
    """
    params = params or RandomForestParams()
    X = matrix.rows
    y = matrix.labels.astype(float)
    n, d = X.shape
    if n == 0:
        raise FitError("cannot fit on zero rows")

    if params.max_depth <= 0 or n < 2:
        prior = TreeNode(value=float(y.mean()), n_samples=n)
        return RandomForestModel(
            params=params,
            seed=seed,
            trees=[prior] * max(params.n_trees, 1),
            n_features=d,
            feature_names=list(matrix.column_names),
        )

    edges = fit_bin_edges(X, params.max_bins)
    data = BinnedDataset(binned=bin_matrix(X, edges), edges=edges)
    k_features = _features_per_split(params.feature_subsample, d)

    trees = []
    for seq in np.random.SeedSequence(seed).spawn(params.n_trees):
        rng = np.random.default_rng(seq)
        sample = rng.integers(0, n, size=n)
        trees.append(_grow(data, y, sample, 0, params, k_features, rng))
    return RandomForestModel(
        params=params,
        seed=seed,
        trees=trees,
        n_features=d,
        feature_names=list(matrix.column_names),
    )
