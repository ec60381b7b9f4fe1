import numpy as np
import pytest

from amrbench.config import RunConfig, load_run_config
from amrbench.errors import ConfigError, FitError
from amrbench.features import assemble_rows
from amrbench.runner import run_mode, run_study
from amrbench.synth import GeneratorConfig, generate

TINY_GRIDS = {
    "l1lr": [{"lambda": 0.003}],
    "rf": [{"n_trees": 8, "max_depth": 5, "min_samples_leaf": 5}],
    "gbm": [{"n_rounds": 15, "max_leaves": 6, "min_samples_leaf": 5}],
    "nn": [{"hidden_sizes": [6], "max_iterations": 5, "batch_size": 64}],
}


@pytest.fixture(scope="module")
def tiny_config():
    config = RunConfig()
    config.grids = dict(TINY_GRIDS)
    return config


@pytest.fixture(scope="module")
def tiny_rows():
    cohort, _ = generate(GeneratorConfig(seed=51, n_stays=150))
    return assemble_rows(cohort)


def test_run_mode_produces_full_roster(tiny_rows, tiny_config):
    result = run_mode(tiny_rows, "random", tiny_config)
    assert list(result.aucs) == ["ab", "l1lr", "rf", "nn", "gbm", "ensemble"]
    assert all(0.0 <= v <= 1.0 for v in result.aucs.values())
    assert result.per_organism, "per-organism table missing"
    assert result.tuned_params["l1lr"] == {"lambda": 0.003}


def test_run_mode_temporal(tiny_rows, tiny_config):
    result = run_mode(tiny_rows, "temporal", tiny_config)
    test_years = np.asarray(result.test.admit_years)
    assert test_years.min() >= tiny_config.cutoff_year


def test_partial_roster_without_ensemble(tiny_rows, tiny_config):
    config = RunConfig()
    config.grids = dict(TINY_GRIDS)
    config.roster = ["ab", "l1lr"]
    result = run_mode(tiny_rows, "random", config)
    assert set(result.models) == {"ab", "l1lr"}


def test_ensemble_without_members_is_fit_error(tiny_rows):
    config = RunConfig()
    config.grids = dict(TINY_GRIDS)
    config.roster = ["ab", "ensemble"]
    with pytest.raises(FitError, match="ensemble requires"):
        run_mode(tiny_rows, "random", config)


def test_run_study_requires_paths():
    with pytest.raises(ConfigError):
        run_study(RunConfig())


def test_unknown_grid_family_rejected(tmp_path):
    path = tmp_path / "c.json"
    path.write_text('{"models": {"grids": {"svm": [{"c": 1}]}}}')
    with pytest.raises(ConfigError, match="svm"):
        load_run_config(path)


def test_empty_grid_rejected(tmp_path):
    path = tmp_path / "c.json"
    path.write_text('{"models": {"grids": {"l1lr": []}}}')
    with pytest.raises(ConfigError, match="empty"):
        load_run_config(path)


def test_threads_env_fallback(tmp_path, monkeypatch):
    path = tmp_path / "c.json"
    path.write_text("{}")
    monkeypatch.setenv("AMRBENCH_THREADS", "4")
    assert load_run_config(path).threads == 4
    monkeypatch.setenv("AMRBENCH_THREADS", "lots")
    with pytest.raises(ConfigError):
        load_run_config(path)


def test_config_hash_stable_and_sensitive(tmp_path):
    path = tmp_path / "c.json"
    path.write_text('{"seed": 7}')
    a = load_run_config(path)
    b = load_run_config(path)
    assert a.config_hash() == b.config_hash()
    c = load_run_config(path, {"seed": 8})
    assert a.config_hash() != c.config_hash()
