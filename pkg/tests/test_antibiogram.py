import numpy as np
import pytest

from amrbench.errors import FitError
from amrbench.features import FeatureMatrix
from amrbench.models import fit_antibiogram


def _matrix(ao_keys, labels):
    n = len(ao_keys)
    return FeatureMatrix(
        column_names=[],
        rows=np.zeros((n, 0)),
        row_keys=[f"T{i}" for i in range(n)],
        labels=np.asarray(labels, dtype=np.int8),
        group_ids=[f"S{i}" for i in range(n)],
        ao_keys=list(ao_keys),
    )


def test_cell_rates_by_hand_count():
    keys = ["a"] * 10 + ["b"] * 7
    labels = [1] * 3 + [0] * 7 + [0] * 7
    model = fit_antibiogram(_matrix(keys, labels))
    assert model.cell_rates["a"] == pytest.approx(0.3)
    assert model.cell_rates["b"] == 0.0
    assert model.global_rate == pytest.approx(3 / 17)


def test_prediction_is_lookup_with_global_fallback():
    model = fit_antibiogram(_matrix(["a"] * 10, [1] * 3 + [0] * 7))
    scores = model.predict(_matrix(["a", "zzz"], [0, 0]))
    assert scores[0] == pytest.approx(0.3)
    assert scores[1] == pytest.approx(0.3)  # global rate of the 10 fit rows

    mixed = fit_antibiogram(_matrix(["a"] * 10 + ["b"] * 10, [1] * 3 + [0] * 7 + [1] * 9 + [0]))
    scores = mixed.predict(_matrix(["unseen"], [0]))
    assert scores[0] == pytest.approx(12 / 20)


def test_global_rate_on_paper_proportioned_fixture():
    labels = np.concatenate([np.ones(2285, dtype=int), np.zeros(5510 + 218, dtype=int)])
    keys = [f"k{i % 13}" for i in range(labels.size)]
    model = fit_antibiogram(_matrix(keys, labels))
    assert model.global_rate == pytest.approx(0.285, abs=1e-3)


def test_exactness_against_brute_force_recount(rng):
    keys = [f"k{rng.integers(6)}" for _ in range(500)]
    labels = (rng.random(500) < 0.3).astype(int)
    fit_rows = _matrix(keys, labels)
    model = fit_antibiogram(fit_rows)
    scores = model.predict(fit_rows)
    for i, key in enumerate(keys):
        members = [labels[j] for j in range(500) if keys[j] == key]
        assert scores[i] == sum(members) / len(members)


def test_rates_all_within_unit_interval(rng):
    keys = [f"k{rng.integers(20)}" for _ in range(300)]
    labels = (rng.random(300) < 0.5).astype(int)
    model = fit_antibiogram(_matrix(keys, labels))
    assert all(0.0 <= r <= 1.0 for r in model.cell_rates.values())
    assert 0.0 <= model.global_rate <= 1.0


def test_empty_input_is_fit_error():
    with pytest.raises(FitError):
        fit_antibiogram(_matrix([], []))
