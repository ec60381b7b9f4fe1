import numpy as np

from amrbench.features import FeatureMatrix
from amrbench.models import (
    GbmParams,
    MlpParams,
    RandomForestParams,
    ensemble_average,
    fit_antibiogram,
    fit_gbm,
    fit_l1_logistic,
    fit_mlp,
    fit_random_forest,
    load_model,
    save_model,
)


def _matrix(rng, n=150):
    X = rng.integers(0, 30, size=(n, 4)) / 29.0
    y = ((X[:, 0] + 0.3 * rng.random(n)) > 0.6).astype(np.int8)
    return FeatureMatrix(
        column_names=[f"f{j}" for j in range(4)],
        rows=X,
        row_keys=[f"T{i}" for i in range(n)],
        labels=y,
        group_ids=[f"S{i}" for i in range(n)],
        ao_keys=[f"k{i % 5}" for i in range(n)],
    )


def _fit_all(rng):
    train = _matrix(rng)
    members = {
        "nn": fit_mlp(train, MlpParams(hidden_sizes=(5,), max_iterations=8), seed=3),
        "gbm": fit_gbm(train, GbmParams(n_rounds=6, max_leaves=4), seed=3),
        "rf": fit_random_forest(train, RandomForestParams(n_trees=4, max_depth=4), seed=3),
    }
    return train, {
        "ab": fit_antibiogram(train),
        "l1lr": fit_l1_logistic(train, lam=0.005),
        **members,
        "ensemble": ensemble_average(list(members.values())),
    }


def test_every_family_round_trips_bit_exactly(tmp_path, rng):
    train, models = _fit_all(rng)
    probe = _matrix(rng, n=40)
    for name, model in models.items():
        path = tmp_path / f"{name}.json"
        save_model(model, path, header={"toolkit_version": "0.1.0", "seed": 1})
        loaded = load_model(path)
        original = model.predict(probe)
        restored = loaded.predict(probe)
        assert np.array_equal(original, restored), f"{name} predictions drifted"


def test_weights_stored_as_17_digit_decimal_strings(tmp_path, rng):
    train, models = _fit_all(rng)
    path = tmp_path / "l1lr.json"
    save_model(models["l1lr"], path)
    import json

    payload = json.loads(path.read_text())
    assert payload["kind"] == "l1_logistic"
    assert isinstance(payload["weights"][0], str)
    assert float(payload["intercept"]) == models["l1lr"].intercept
    for text, value in zip(payload["weights"], models["l1lr"].weights):
        assert float(text) == value  # 17 significant digits round-trip doubles

    loaded = load_model(path)
    assert np.array_equal(loaded.weights, models["l1lr"].weights)
    assert loaded.intercept == models["l1lr"].intercept


def test_save_is_deterministic(tmp_path, rng):
    train, models = _fit_all(rng)
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    save_model(models["gbm"], a)
    save_model(models["gbm"], b)
    assert a.read_bytes() == b.read_bytes()


def test_antibiogram_rates_round_trip(tmp_path, rng):
    train, models = _fit_all(rng)
    path = tmp_path / "ab.json"
    save_model(models["ab"], path)
    loaded = load_model(path)
    assert loaded.cell_rates == models["ab"].cell_rates
    assert loaded.global_rate == models["ab"].global_rate
