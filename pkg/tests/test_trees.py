import numpy as np
import pytest

from amrbench.features import FeatureMatrix
from amrbench.models import (
    GbmParams,
    RandomForestParams,
    fit_gbm,
    fit_random_forest,
    model_to_dict,
)
from amrbench.models._math import log_loss_from_margin
from amrbench.models._tree import predict_tree


def _matrix(X, y):
    X = np.asarray(X, dtype=float)
    return FeatureMatrix(
        column_names=[f"f{j}" for j in range(X.shape[1])],
        rows=X,
        row_keys=[f"T{i}" for i in range(X.shape[0])],
        labels=np.asarray(y, dtype=np.int8),
        group_ids=[f"S{i}" for i in range(X.shape[0])],
    )


def _separable(rng, n=80):
    # quantized features keep every candidate threshold exactly representable
    # in the 64-bin histograms, so the exhaustive-search oracle applies
    X = rng.integers(0, 40, size=(n, 3)) / 39.0
    y = (X[:, 1] > 0.5).astype(int)
    return X, y


class TestRandomForest:
    def test_depth_zero_predicts_training_prevalence(self, rng):
        X, y = _separable(rng)
        params = RandomForestParams(n_trees=7, max_depth=0)
        model = fit_random_forest(_matrix(X, y), params, seed=1)
        scores = model.predict(_matrix(X, y))
        assert np.allclose(scores, y.mean())

    def test_separable_data_reaches_perfect_training_accuracy(self, rng):
        X, y = _separable(rng)
        # oracle: exhaustive threshold search confirms a single split separates
        best = max(
            np.mean((X[:, j] > t) == y)
            for j in range(3)
            for t in np.unique(X[:, j])
        )
        assert best == 1.0
        params = RandomForestParams(n_trees=15, max_depth=6, min_samples_leaf=1,
                                    feature_subsample="all")
        model = fit_random_forest(_matrix(X, y), params, seed=3)
        scores = model.predict(_matrix(X, y))
        assert np.mean((scores > 0.5) == y) == 1.0

    def test_predictions_within_member_tree_range(self, rng):
        X, y = _separable(rng)
        X_test = rng.random((40, 3))
        params = RandomForestParams(n_trees=9, max_depth=4, min_samples_leaf=2)
        model = fit_random_forest(_matrix(X, y), params, seed=5)
        per_tree = np.array([predict_tree(t, X_test) for t in model.trees])
        scores = model.predict(_matrix(X_test, np.zeros(40)))
        assert np.all(scores >= per_tree.min(axis=0) - 1e-12)
        assert np.all(scores <= per_tree.max(axis=0) + 1e-12)
        assert np.all((scores >= 0) & (scores <= 1))

    def test_identical_seed_gives_identical_trees(self, rng):
        X, y = _separable(rng, n=120)
        params = RandomForestParams(n_trees=5, max_depth=5)
        a = fit_random_forest(_matrix(X, y), params, seed=9)
        b = fit_random_forest(_matrix(X, y), params, seed=9)
        c = fit_random_forest(_matrix(X, y), params, seed=10)
        assert model_to_dict(a) == model_to_dict(b)
        assert model_to_dict(a) != model_to_dict(c)

    def test_single_row_input_predicts_prior(self):
        model = fit_random_forest(_matrix([[0.5, 0.5]], [1]), RandomForestParams(n_trees=3), seed=1)
        scores = model.predict(_matrix([[0.1, 0.9]], [0]))
        assert np.allclose(scores, 1.0)


class TestGbm:
    def test_zero_rounds_predicts_prevalence_exactly(self, rng):
        X, y = _separable(rng)
        params = GbmParams(n_rounds=0)
        model = fit_gbm(_matrix(X, y), params, seed=1)
        scores = model.predict(_matrix(X, y))
        assert np.allclose(scores, y.mean(), atol=1e-12)
        assert model.train_losses[0] == pytest.approx(
            log_loss_from_margin(np.full(y.size, model.base_score), y.astype(float))
        )

    def test_one_round_strictly_reduces_log_loss(self, rng):
        X, y = _separable(rng)
        params = GbmParams(n_rounds=1, max_leaves=2, min_samples_leaf=1, learning_rate=0.3)
        model = fit_gbm(_matrix(X, y), params, seed=1)
        assert len(model.train_losses) == 2
        assert model.train_losses[1] < model.train_losses[0]
        # recompute both losses on the fixture from the model itself
        margin0 = np.full(y.size, model.base_score)
        margin1 = model.decision(X)
        assert log_loss_from_margin(margin1, y.astype(float)) == pytest.approx(model.train_losses[1])
        assert log_loss_from_margin(margin0, y.astype(float)) == pytest.approx(model.train_losses[0])

    def test_root_split_matches_brute_force_gain_oracle(self, rng):
        X = rng.random((60, 2))
        y = ((X[:, 0] > 0.6) | (rng.random(60) < 0.15)).astype(int)
        params = GbmParams(n_rounds=1, max_leaves=2, min_samples_leaf=1, hessian_reg=1.0)
        model = fit_gbm(_matrix(X, y), params, seed=1)
        root = model.trees[0]

        p = y.mean()
        g = np.full(y.size, p) - y
        h = np.full(y.size, p * (1 - p))
        best_gain, best = -np.inf, None
        for j in range(2):
            uniques = np.unique(X[:, j])
            for threshold in (uniques[:-1] + uniques[1:]) / 2:
                left = X[:, j] <= threshold
                gl, hl = g[left].sum(), h[left].sum()
                gr, hr = g[~left].sum(), h[~left].sum()
                gain = 0.5 * (gl ** 2 / (hl + 1) + gr ** 2 / (hr + 1) - g.sum() ** 2 / (h.sum() + 1))
                if gain > best_gain:
                    best_gain, best = gain, (j, threshold)
        assert root.feature == best[0]
        assert root.threshold == pytest.approx(best[1])

    def test_leaf_wise_splits_dominant_region_first(self):
        # left half is pure; all the loss lives in the right half, which is
        # separable on the second feature, so leaf-wise growth must split the
        # right child next rather than completing the level.
        rng = np.random.default_rng(4)
        n = 60
        f0 = np.repeat([0.0, 1.0], n // 2)
        f1 = rng.random(n)
        y = np.where(f0 == 0.0, 0, (f1 > 0.5).astype(int))
        X = np.column_stack([f0, f1])
        params = GbmParams(n_rounds=1, max_leaves=3, min_samples_leaf=1)
        model = fit_gbm(_matrix(X, y), params, seed=1)
        root = model.trees[0]
        assert root.feature == 0
        assert root.left.is_leaf  # pure region stays a leaf
        assert not root.right.is_leaf  # dominant-loss region was split
        assert root.right.feature == 1

    def test_training_loss_monotone_over_many_rounds(self, rng):
        X = rng.random((200, 4))
        logits = 2.5 * X[:, 0] - 2.0 * X[:, 1] + rng.normal(0, 0.5, 200)
        y = (rng.random(200) < 1 / (1 + np.exp(-logits))).astype(int)
        params = GbmParams(n_rounds=60, max_leaves=8, min_samples_leaf=5, learning_rate=0.2)
        model = fit_gbm(_matrix(X, y), params, seed=2)
        losses = np.array(model.train_losses)
        assert losses.size == 61
        assert np.all(np.diff(losses) <= 1e-12)

    def test_identical_seed_identical_model(self, rng):
        X, y = _separable(rng, n=100)
        params = GbmParams(n_rounds=5, max_leaves=4, feature_fraction=0.5)
        a = fit_gbm(_matrix(X, y), params, seed=11)
        b = fit_gbm(_matrix(X, y), params, seed=11)
        assert model_to_dict(a) == model_to_dict(b)

    def test_predictions_strictly_inside_unit_interval(self, rng):
        X, y = _separable(rng)
        model = fit_gbm(_matrix(X, y), GbmParams(n_rounds=30, max_leaves=4), seed=1)
        scores = model.predict(_matrix(X, y))
        assert np.all(scores > 0.0) and np.all(scores < 1.0)
