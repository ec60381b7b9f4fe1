import numpy as np

from amrbench.features import FeatureMatrix
from amrbench.models import MlpParams, fit_mlp, init_parameters, loss_and_gradients

from oracles import gradient_relative_error as relative_error
from oracles import numerical_gradients


def _matrix(X, y):
    X = np.asarray(X, dtype=float)
    return FeatureMatrix(
        column_names=[f"f{j}" for j in range(X.shape[1])],
        rows=X,
        row_keys=[f"T{i}" for i in range(X.shape[0])],
        labels=np.asarray(y, dtype=np.int8),
        group_ids=[f"S{i}" for i in range(X.shape[0])],
    )


def test_relu_and_open_interval_output(rng):
    X = rng.random((10, 3))
    weights, biases = init_parameters(3, (4,), rng)
    # relu of a negative pre-activation is exactly zero
    assert np.maximum(np.array([-1.0]), 0.0)[0] == 0.0
    model_like = fit_mlp(_matrix(X, rng.integers(0, 2, 10)), MlpParams(hidden_sizes=(4,), max_iterations=1), seed=0)
    scores = model_like.predict(_matrix(X, np.zeros(10)))
    assert np.all(scores > 0.0) and np.all(scores < 1.0)


def test_analytic_gradients_match_finite_differences(rng):
    for trial in range(8):
        n_features = int(rng.integers(2, 6))
        hidden = tuple(int(rng.integers(2, 8)) for _ in range(int(rng.integers(1, 3))))
        n = int(rng.integers(4, 12))
        X = rng.random((n, n_features))
        y = rng.integers(0, 2, n).astype(float)
        weights, biases = init_parameters(n_features, hidden, rng)
        # random biases keep every pre-activation away from the relu kink,
        # where a finite-difference check is invalid by construction
        for b in biases:
            b += rng.normal(0.0, 0.3, size=b.shape)
        _, grad_w, grad_b = loss_and_gradients(weights, biases, X, y)
        num_w, num_b = numerical_gradients(weights, biases, X, y)
        for analytic, numeric in zip(grad_w + grad_b, num_w + num_b):
            assert relative_error(analytic, numeric) < 1e-4


def test_learns_and_function_within_2000_iterations():
    X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    y = np.array([0, 0, 0, 1])
    params = MlpParams(hidden_sizes=(4,), max_iterations=2000, step_size=0.05, batch_size=4)
    model = fit_mlp(_matrix(X, y), params, seed=2)
    scores = model.predict(_matrix(X, y))
    assert np.mean((scores > 0.5) == y) == 1.0


def test_deterministic_given_seed(rng):
    X = rng.random((40, 3))
    y = rng.integers(0, 2, 40)
    params = MlpParams(hidden_sizes=(6,), max_iterations=20, batch_size=16)
    a = fit_mlp(_matrix(X, y), params, seed=7)
    b = fit_mlp(_matrix(X, y), params, seed=7)
    for wa, wb in zip(a.weights, b.weights):
        assert np.array_equal(wa, wb)
    c = fit_mlp(_matrix(X, y), params, seed=8)
    assert any(not np.array_equal(wa, wc) for wa, wc in zip(a.weights, c.weights))


def test_layer_sizes_reported():
    X = np.zeros((4, 5))
    y = np.array([0, 1, 0, 1])
    model = fit_mlp(_matrix(X, y), MlpParams(hidden_sizes=(8, 3), max_iterations=1), seed=0)
    assert model.layer_sizes == [5, 8, 3, 1]
