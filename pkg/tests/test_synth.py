import numpy as np
import pytest

from amrbench.errors import ConfigError
from amrbench.eval import auc
from amrbench.features import assemble_rows, compute_prior_resistance
from amrbench.ingest import load_tables
from amrbench.models import fit_antibiogram
from amrbench.synth import (
    GeneratorConfig,
    TemporalDrift,
    generate,
    load_ground_truth,
    write_synthetic_files,
)
from amrbench.features import FeatureMatrix


def _no_signal_config(seed=5):
    return GeneratorConfig(
        seed=seed,
        n_stays=220,
        planted_coefficients={},
        cell_base_sd=0.0,
        temporal_drift=TemporalDrift(per_year=0.0, cell_slope_sd=0.0, reversion=0.0),
    )


def test_no_signal_gives_flat_probabilities_and_half_bayes():
    cohort, truth = generate(_no_signal_config())
    probs = truth.true_probabilities
    assert probs.max() == probs.min()  # every row sits at the base rate
    assert truth.bayes_auc == pytest.approx(0.5, abs=1e-12)
    assert abs(truth.prevalence - 0.285) < 3 * np.sqrt(0.285 * 0.715 / len(cohort.tests))


def test_prevalence_calibrated_within_three_standard_errors():
    for seed in (1, 2, 3):
        config = GeneratorConfig(seed=seed, n_stays=400)
        cohort, truth = generate(config)
        se = np.sqrt(config.mean_prevalence * (1 - config.mean_prevalence) / len(cohort.tests))
        assert abs(truth.prevalence - config.mean_prevalence) <= 3 * se


def test_planted_cell_matches_closed_form_sigmoid_large_n():
    # Monte Carlo check at ~1e5 tests: the single planted cell's empirical
    # rate must match sigmoid(intercept + 4) within sampling error.
    key = "ao_vancomycin_Staphylococcus aureus"
    config = GeneratorConfig(
        seed=17,
        n_stays=16200,
        planted_coefficients={key: 4.0},
        cell_base_sd=0.0,
        temporal_drift=TemporalDrift(per_year=0.0, cell_slope_sd=0.0, reversion=0.0),
    )
    cohort, truth = generate(config)
    assert len(cohort.tests) >= 1e5
    labels = np.array([1 if t.sensitivity.value == "Resistant" else 0 for t in cohort.tests])
    in_cell = np.array(
        [t.antibiotic == "vancomycin" and t.organism == "Staphylococcus aureus" for t in cohort.tests]
    )
    expected = 1.0 / (1.0 + np.exp(-(truth.intercept + 4.0)))
    n_cell = in_cell.sum()
    rate = labels[in_cell].mean()
    se = np.sqrt(expected * (1 - expected) / n_cell)
    assert rate > labels.mean()
    assert abs(rate - expected) <= 4 * se

    # ground-truth consistency at scale: the recorded Bayes AUC is the AUC of
    # the true probabilities, and a fitted model cannot beat it by >0.02
    assert truth.bayes_auc == pytest.approx(auc(truth.true_probabilities, labels), abs=1e-12)
    matrix = FeatureMatrix(
        column_names=[],
        rows=np.zeros((labels.size, 0)),
        row_keys=[t.test_id for t in cohort.tests],
        labels=labels.astype(np.int8),
        group_ids=[t.patient_unit_stay_id for t in cohort.tests],
        ao_keys=[f"ao_{t.antibiotic}_{t.organism}" for t in cohort.tests],
    )
    ab = fit_antibiogram(matrix)
    assert auc(ab.predict(matrix), labels) <= truth.bayes_auc + 0.02


def test_same_seed_byte_identical_files(tmp_path):
    config = GeneratorConfig(seed=9, n_stays=120)
    for name in ("a", "b"):
        cohort, truth = generate(config)
        write_synthetic_files(cohort, truth, tmp_path / name, header={"seed": 9})
    for filename in ("stays.csv", "micro.csv", "ground_truth.json"):
        assert (tmp_path / "a" / filename).read_bytes() == (tmp_path / "b" / filename).read_bytes()
    cohort, truth = generate(GeneratorConfig(seed=10, n_stays=120))
    write_synthetic_files(cohort, truth, tmp_path / "c", header={"seed": 10})
    assert (tmp_path / "a" / "micro.csv").read_bytes() != (tmp_path / "c" / "micro.csv").read_bytes()


def test_emitted_files_reload_through_ingest(tmp_path):
    config = GeneratorConfig(seed=21, n_stays=150)
    cohort, truth = generate(config)
    paths = write_synthetic_files(cohort, truth, tmp_path, header={"seed": 21})
    reloaded = load_tables(paths["stays"], paths["micro"])
    assert len(reloaded.stays) == len(cohort.stays)
    assert len(reloaded.tests) == len(cohort.tests)
    # ages emitted as ">89" come back as 90
    for original, parsed in zip(cohort.stays, reloaded.stays):
        assert parsed.age == original.age
    truth_loaded = load_ground_truth(paths["ground_truth"])
    assert truth_loaded.intercept == truth.intercept
    assert np.array_equal(truth_loaded.true_probabilities, truth.true_probabilities)


def test_generator_y_pre_rule_matches_feature_pipeline(tmp_path):
    # the generator's causal y_pre qualification must agree with the
    # pipeline's compute_prior_resistance on the emitted cohort
    config = GeneratorConfig(seed=33, n_stays=200, revisit_rate=0.4, repeat_key_rate=0.6)
    cohort, truth = generate(config)
    rows = assemble_rows(cohort)
    by_patient = {}
    stay_by_id = cohort.stay_by_id()
    for test in cohort.tests:
        by_patient.setdefault(stay_by_id[test.patient_unit_stay_id].patient_id, []).append(test)
    label_by_id = {t.test_id: (1 if t.sensitivity.value == "Resistant" else 0) for t in cohort.tests}
    checked = 0
    for i, test in enumerate(cohort.tests):
        patient = stay_by_id[test.patient_unit_stay_id].patient_id
        expected = compute_prior_resistance(by_patient[patient], test)
        got = rows.numeric["y_pre"][i]
        if expected is None:
            assert np.isnan(got)
        else:
            assert got == pytest.approx(expected)
            checked += 1
    assert checked > 20  # fixture really exercises the history path


def test_config_validation_errors():
    with pytest.raises(ConfigError):
        generate(GeneratorConfig(n_stays=0))
    with pytest.raises(ConfigError):
        generate(GeneratorConfig(mean_prevalence=1.2))
    with pytest.raises(ConfigError):
        generate(GeneratorConfig(organism_weights={"Martian bug": 1.0}))
    with pytest.raises(ConfigError):
        generate(GeneratorConfig(missing_rates={"height_cm": 1.5}))
