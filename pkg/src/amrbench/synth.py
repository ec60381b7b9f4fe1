"""Synthetic cohort generator with a fully-known generative process.

Resistance outcomes are drawn from a planted logistic model over
anti-organism indicators, prior-resistance history, demographics, admission
diagnoses, and a per-cell temporal drift. Outcome draws reuse one fixed
uniform per test, so the intercept can be calibrated to the configured mean
prevalence by bisection without disturbing determinism. Prior resistance is
genuinely causal: each outcome feeds the later same-key tests of the same
patient through the same >48 h qualification rule the feature pipeline uses.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError
from .eval import auc
from .features import PRIOR_WINDOW_MINUTES, make_anti_organism
from .ingest import (
    STUDY_ANTIBIOTICS,
    STUDY_ORGANISMS,
    Cohort,
    MicrobiologyTest,
    PatientStay,
    SensitivityLabel,
    serialize_cohort,
)

logger = logging.getLogger(__name__)

DEFAULT_ORGANISM_WEIGHTS = {
    "Staphylococcus aureus": 0.346,
    "Escherichia coli": 0.271,
    "Klebsiella pneumoniae": 0.160,
    "Pseudomonas aeruginosa": 0.117,
    "Staphylococcus epidermidis": 0.054,
    "Enterobacter cloacae": 0.052,
}

DEFAULT_ANTIBIOTIC_WEIGHTS = {
    "vancomycin": 0.18,
    "ciprofloxacin": 0.14,
    "oxacillin": 0.12,
    "cefipime": 0.10,
    "trimethoprim/sulfamethoxazole": 0.10,
    "cefazolin": 0.09,
    "imipenem/cilastatin": 0.08,
    "ampicillin": 0.08,
    "ampicillin/sulbactam": 0.06,
    "nitrofurantoin": 0.05,
}

# ~80% of stays fall before the default temporal cutoff (2012).
DEFAULT_YEAR_WEIGHTS = {
    2007: 0.13, 2008: 0.14, 2009: 0.16, 2010: 0.18, 2011: 0.19,
    2012: 0.12, 2013: 0.08,
}

DEFAULT_ADMISSION_DX = {
    "Sepsis, pulmonary": 0.24,
    "Infarction, acute myocardial": 0.18,
    "CHF, congestive heart failure": 0.16,
    "Trauma, multiple": 0.14,
    "Diabetic ketoacidosis": 0.12,
    "Ventriculostomy": 0.09,
    "Spinal cord surgery, other": 0.07,
}

# Keys are feature-pipeline column names; numeric features enter the true
# model standardized to roughly [0,1] (see _standardize).
DEFAULT_PLANTED_COEFFICIENTS = {
    "ao_nitrofurantoin_Staphylococcus aureus": -5.9,
    "ao_vancomycin_Staphylococcus epidermidis": -5.7,
    "ao_imipenem/cilastatin_Escherichia coli": -5.5,
    "ao_vancomycin_Staphylococcus aureus": -4.9,
    "ao_cefazolin_Enterobacter cloacae": 4.7,
    "ao_ampicillin_Pseudomonas aeruginosa": 4.6,
    "ao_ampicillin_Klebsiella pneumoniae": 4.5,
    "ao_nitrofurantoin_Pseudomonas aeruginosa": 4.0,
    "y_pre": 4.5,
    "apacheadmissiondx_Ventriculostomy": -3.0,
    "apacheadmissiondx_Spinal cord surgery, other": -2.5,
    "age": 2.0,
    "admit_weight_kg": 1.5,
}

DEFAULT_MISSING_RATES = {
    "height_cm": 0.12,
    "admit_weight_kg": 0.08,
    "discharge_weight_kg": 0.25,
    "hospital_admit_offset_min": 0.05,
    "gender": 0.01,
    "ethnicity": 0.05,
    "admission_dx": 0.04,
    "culture_site": 0.03,
}


@dataclass
class TemporalDrift:
    """Per-year additive log-odds shift; each anti-organism cell gets its own
    slope drawn around the global one so cells re-rank over time.

    ``reversion`` pulls every cell toward the population middle as years pass
    (resistance emerging in formerly sensitive cells and vice versa), which
    makes later years genuinely harder to predict from earlier data.
    """
    base_year: int = 2010
    per_year: float = 0.05
    cell_slope_sd: float = 0.25
    reversion: float = 0.15


@dataclass
class GeneratorConfig:
    seed: int = 20070331
    n_stays: int = 1300
    revisit_rate: float = 0.15
    repeat_key_rate: float = 0.4  # follow-up culture repeats an earlier key of the patient
    tests_per_stay_mean: float = 6.2
    tests_per_stay_min: int = 1
    mean_prevalence: float = 0.285
    cell_base_sd: float = 1.2  # per-cell baseline log-odds spread (antibiogram signal)
    year_weights: dict[int, float] = field(default_factory=lambda: dict(DEFAULT_YEAR_WEIGHTS))
    organism_weights: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_ORGANISM_WEIGHTS))
    antibiotic_weights: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_ANTIBIOTIC_WEIGHTS))
    planted_coefficients: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_PLANTED_COEFFICIENTS))
    temporal_drift: TemporalDrift = field(default_factory=TemporalDrift)
    missing_rates: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_MISSING_RATES))

    def validate(self) -> None:
        if self.n_stays < 1:
            raise ConfigError("n_stays must be >= 1")
        if not 0.0 < self.mean_prevalence < 1.0:
            raise ConfigError("mean_prevalence must be inside (0,1)")
        for name, weights in (
            ("organism_weights", self.organism_weights),
            ("antibiotic_weights", self.antibiotic_weights),
            ("year_weights", self.year_weights),
        ):
            if not weights or sum(weights.values()) <= 0:
                raise ConfigError(f"{name} must contain positive weights")
            if any(w < 0 for w in weights.values()):
                raise ConfigError(f"{name} must be non-negative")
        for field_name, rate in self.missing_rates.items():
            if not 0.0 <= rate < 1.0:
                raise ConfigError(f"missing rate for {field_name} must be in [0,1)")
        unknown_orgs = set(self.organism_weights) - set(STUDY_ORGANISMS)
        unknown_antis = set(self.antibiotic_weights) - set(STUDY_ANTIBIOTICS)
        if unknown_orgs or unknown_antis:
            raise ConfigError(
                f"weights reference non-study keys: {sorted(unknown_orgs | unknown_antis)}"
            )


@dataclass
class GroundTruth:
    """Planted model record: ``coefficients`` holds every effect actually in
    force, including the drawn per-cell baselines (explicit plants override
    the draw for their cell)."""
    intercept: float
    coefficients: dict[str, float]
    cell_year_slopes: dict[str, float]
    drift_base_year: int
    bayes_auc: float
    prevalence: float
    test_ids: list[str]
    true_probabilities: np.ndarray
    mean_prevalence_target: float


def _weighted_choice(rng: np.random.Generator, weights: dict) -> object:
    keys = list(weights)
    probs = np.array([weights[k] for k in keys], dtype=float)
    probs = probs / probs.sum()
    return keys[rng.choice(len(keys), p=probs)]


def _standardize(name: str, value: float) -> float:
    if name == "age":
        return (value - 16.0) / 74.0
    if name == "admit_weight_kg":
        return (value - 40.0) / 100.0
    if name == "height_cm":
        return (value - 140.0) / 60.0
    return value


@dataclass
class _TestDraft:
    stay_index: int
    test_index: int
    organism: str
    antibiotic: str
    offset_min: float
    site: Optional[str]
    fixed_logit: float = 0.0
    qualifying_prior: list[int] = field(default_factory=list)


def generate(config: GeneratorConfig) -> tuple[Cohort, GroundTruth]:
    """Sample a cohort and its ground truth; byte-stable for a given seed."""
    config.validate()
    root = np.random.SeedSequence(config.seed)
    stay_seq, drift_seq, cell_seq, outcome_seq = root.spawn(4)

    # Baseline resistance level per anti-organism cell; this is the part of
    # the signal a plain antibiogram can capture. Explicit plants override.
    cell_rng = np.random.default_rng(cell_seq)
    cell_effects = {}
    for organism in STUDY_ORGANISMS:
        for antibiotic in STUDY_ANTIBIOTICS:
            key = make_anti_organism(antibiotic, organism)
            cell_effects[key] = config.cell_base_sd * cell_rng.standard_normal()
    for key, value in config.planted_coefficients.items():
        if key.startswith("ao_"):
            cell_effects[key] = value

    drift_rng = np.random.default_rng(drift_seq)
    drift = config.temporal_drift
    cell_slopes = {}
    for organism in STUDY_ORGANISMS:
        for antibiotic in STUDY_ANTIBIOTICS:
            key = make_anti_organism(antibiotic, organism)
            cell_slopes[key] = (
                drift.per_year
                + drift.cell_slope_sd * drift_rng.standard_normal()
                - drift.reversion * cell_effects[key]
            )

    max_year = max(config.year_weights)
    genders = {"Female": 0.46, "Male": 0.54}
    ethnicities = {
        "Caucasian": 0.62, "African American": 0.15, "Hispanic": 0.12,
        "Asian": 0.06, "Other": 0.05,
    }
    unit_types = {"MICU": 0.3, "SICU": 0.22, "Med-Surg ICU": 0.28, "CCU": 0.12, "Neuro ICU": 0.08}
    stay_types = {"admit": 0.78, "transfer": 0.15, "readmit": 0.07}
    admit_sources = {"Emergency Department": 0.52, "Operating Room": 0.2, "Floor": 0.18, "Direct Admit": 0.1}
    hospital_sources = {"Emergency Department": 0.55, "Other Hospital": 0.15, "Floor": 0.14, "Home": 0.16}
    locations = {f"loc_{k:02d}": w for k, w in zip(range(1, 13), (14, 12, 11, 10, 9, 9, 8, 7, 6, 5, 5, 4))}
    sites = {"Blood": 0.34, "Urine": 0.26, "Sputum": 0.22, "Wound": 0.1, "Respiratory": 0.08}

    patients: list[dict] = []  # {"id", "last_year", "visits", "keys"}
    stay_dicts: list[dict] = []
    drafts: list[_TestDraft] = []

    stay_rngs = stay_seq.spawn(config.n_stays)
    for i in range(config.n_stays):
        rng = np.random.default_rng(stay_rngs[i])
        eligible = [p for p in patients if p["last_year"] < max_year]
        if eligible and rng.random() < config.revisit_rate:
            patient = eligible[int(rng.integers(len(eligible)))]
            later_years = {y: w for y, w in config.year_weights.items() if y > patient["last_year"]}
            year = int(_weighted_choice(rng, later_years))
            patient["last_year"] = year
            patient["visits"] += 1
            visit = patient["visits"]
        else:
            patient = {"id": f"P{len(patients) + 1:05d}", "last_year": 0, "visits": 1, "keys": []}
            year = int(_weighted_choice(rng, config.year_weights))
            patient["last_year"] = year
            patients.append(patient)
            visit = 1

        def missing(field_name: str) -> bool:
            return rng.random() < config.missing_rates.get(field_name, 0.0)

        age = int(np.clip(round(rng.normal(62.0, 16.0)), 16, 90))
        height = float(np.clip(rng.normal(170.0, 11.0), 140.0, 205.0))
        admit_weight = float(np.clip(rng.normal(82.0, 18.0), 40.0, 140.0))
        discharge_weight = float(np.clip(admit_weight + rng.normal(0.0, 4.0), 38.0, 145.0))
        hosp_offset = -float(rng.exponential(900.0)) if rng.random() > 0.2 else 0.0

        stay = {
            "patient_unit_stay_id": f"S{i + 1:06d}",
            "patient_id": patient["id"],
            "gender": None if missing("gender") else _weighted_choice(rng, genders),
            "age": age,
            "ethnicity": None if missing("ethnicity") else _weighted_choice(rng, ethnicities),
            "height_cm": None if missing("height_cm") else height,
            "admit_weight_kg": None if missing("admit_weight_kg") else admit_weight,
            "discharge_weight_kg": None if missing("discharge_weight_kg") else discharge_weight,
            "unit_location_id": _weighted_choice(rng, locations),
            "unit_type": _weighted_choice(rng, unit_types),
            "unit_stay_type": _weighted_choice(rng, stay_types),
            "unit_admit_source": _weighted_choice(rng, admit_sources),
            "hospital_admit_source": _weighted_choice(rng, hospital_sources),
            "hospital_admit_offset_min": None if missing("hospital_admit_offset_min") else hosp_offset,
            "icu_visit_number": visit,
            "admission_dx": None if missing("admission_dx") else _weighted_choice(rng, DEFAULT_ADMISSION_DX),
            "unit_admit_year": year,
            "latent_age": age,
            "latent_weight": admit_weight,
        }
        stay_dicts.append(stay)

        n_tests = max(config.tests_per_stay_min, int(rng.poisson(config.tests_per_stay_mean)))
        stay_len_min = rng.uniform(2.0, 14.0) * 1440.0
        offsets = np.sort(rng.uniform(-600.0, stay_len_min, size=n_tests))
        for t in range(n_tests):
            # Follow-up cultures re-test a previous organism/antibiotic pair of
            # the same patient, which is what gives y_pre its history.
            if patient["keys"] and rng.random() < config.repeat_key_rate:
                organism, antibiotic = patient["keys"][int(rng.integers(len(patient["keys"])))]
            else:
                organism = str(_weighted_choice(rng, config.organism_weights))
                antibiotic = str(_weighted_choice(rng, config.antibiotic_weights))
            patient["keys"].append((organism, antibiotic))
            drafts.append(
                _TestDraft(
                    stay_index=i,
                    test_index=len(drafts),
                    organism=organism,
                    antibiotic=antibiotic,
                    offset_min=float(round(offsets[t])),
                    site=None if missing("culture_site") else str(_weighted_choice(rng, sites)),
                )
            )

    if not drafts:
        raise ConfigError("generator produced no tests; check tests_per_stay settings")

    coefficients = dict(config.planted_coefficients)
    for draft in drafts:
        stay = stay_dicts[draft.stay_index]
        key = make_anti_organism(draft.antibiotic, draft.organism)
        logit = cell_slopes[key] * (stay["unit_admit_year"] - drift.base_year)
        logit += cell_effects[key]
        logit += coefficients.get("age", 0.0) * _standardize("age", stay["latent_age"])
        logit += coefficients.get("admit_weight_kg", 0.0) * _standardize(
            "admit_weight_kg", stay["latent_weight"]
        )
        if stay["admission_dx"] is not None:
            logit += coefficients.get(f"apacheadmissiondx_{stay['admission_dx']}", 0.0)
        draft.fixed_logit = logit

    _attach_prior_structure(drafts, stay_dicts)

    outcome_rng = np.random.default_rng(outcome_seq)
    uniforms = outcome_rng.random(len(drafts))
    patient_order = _patient_time_order(drafts, stay_dicts)
    w_ypre = coefficients.get("y_pre", 0.0)

    intercept = _calibrate_intercept(
        drafts, patient_order, uniforms, w_ypre, config.mean_prevalence
    )
    labels, true_probs = _realize(drafts, patient_order, uniforms, w_ypre, intercept)
    prevalence = float(labels.mean())
    bayes = auc(true_probs, labels) if 0 < labels.sum() < labels.size else 0.5
    logger.info(
        "generated %d stays, %d tests, prevalence %.4f (target %.4f), bayes AUC %.4f",
        config.n_stays, len(drafts), prevalence, config.mean_prevalence, bayes,
    )

    cohort = _build_cohort(stay_dicts, drafts, labels)
    all_effects = dict(cell_effects)
    for key, value in coefficients.items():
        if not key.startswith("ao_"):
            all_effects[key] = value
    truth = GroundTruth(
        intercept=intercept,
        coefficients=all_effects,
        cell_year_slopes=cell_slopes,
        drift_base_year=drift.base_year,
        bayes_auc=bayes,
        prevalence=prevalence,
        test_ids=[t.test_id for t in cohort.tests],
        true_probabilities=true_probs,
        mean_prevalence_target=config.mean_prevalence,
    )
    return cohort, truth


def _attach_prior_structure(drafts: list[_TestDraft], stay_dicts: list[dict]) -> None:
    """Precompute, per test, which earlier same-patient same-key tests qualify
    as >48h-old history. Qualification depends only on timing, not outcomes,
    and mirrors the feature pipeline's rule."""
    by_patient: dict[str, list[_TestDraft]] = {}
    for draft in drafts:
        pid = stay_dicts[draft.stay_index]["patient_id"]
        by_patient.setdefault(pid, []).append(draft)
    for tests in by_patient.values():
        for current in tests:
            cur_stay = stay_dicts[current.stay_index]
            key = make_anti_organism(current.antibiotic, current.organism)
            for other in tests:
                if other.test_index == current.test_index:
                    continue
                if make_anti_organism(other.antibiotic, other.organism) != key:
                    continue
                other_stay = stay_dicts[other.stay_index]
                if other.stay_index == current.stay_index:
                    if current.offset_min - other.offset_min > PRIOR_WINDOW_MINUTES:
                        current.qualifying_prior.append(other.test_index)
                elif other_stay["unit_admit_year"] < cur_stay["unit_admit_year"]:
                    current.qualifying_prior.append(other.test_index)


def _patient_time_order(drafts: list[_TestDraft], stay_dicts: list[dict]) -> list[int]:
    def sort_key(draft: _TestDraft):
        stay = stay_dicts[draft.stay_index]
        return (
            stay["patient_id"],
            stay["unit_admit_year"],
            stay["icu_visit_number"],
            draft.offset_min,
            draft.test_index,
        )

    return [d.test_index for d in sorted(drafts, key=sort_key)]


def _realize(
    drafts: list[_TestDraft],
    order: list[int],
    uniforms: np.ndarray,
    w_ypre: float,
    intercept: float,
) -> tuple[np.ndarray, np.ndarray]:
    labels = np.zeros(len(drafts), dtype=np.int8)
    probs = np.zeros(len(drafts))
    for index in order:
        draft = drafts[index]
        logit = intercept + draft.fixed_logit
        if draft.qualifying_prior:
            y_pre = float(np.mean([labels[j] for j in draft.qualifying_prior]))
            logit += w_ypre * y_pre
        p = 1.0 / (1.0 + np.exp(-logit))
        probs[index] = p
        labels[index] = 1 if uniforms[index] < p else 0
    return labels, probs


def _calibrate_intercept(
    drafts: list[_TestDraft],
    order: list[int],
    uniforms: np.ndarray,
    w_ypre: float,
    target: float,
    iterations: int = 40,
) -> float:
    """Bisection on the intercept against the fixed outcome uniforms; the
    realized prevalence is monotone in the intercept because a flipped 0->1
    outcome can only raise downstream y_pre terms (w_ypre >= 0)."""
    lo, hi = -12.0, 12.0
    for _ in range(iterations):
        mid = (lo + hi) / 2.0
        labels, _ = _realize(drafts, order, uniforms, w_ypre, mid)
        if labels.mean() < target:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


def _build_cohort(stay_dicts: list[dict], drafts: list[_TestDraft], labels: np.ndarray) -> Cohort:
    def fmt(value, spec: str = "") -> str:
        if value is None:
            return ""
        if spec:
            return format(value, spec)
        return str(value)

    stays = []
    for stay in stay_dicts:
        age_text = ">89" if stay["age"] >= 90 else str(stay["age"])
        raw = (
            stay["patient_unit_stay_id"],
            stay["patient_id"],
            fmt(stay["gender"]),
            age_text,
            fmt(stay["ethnicity"]),
            fmt(stay["height_cm"], ".1f"),
            fmt(stay["admit_weight_kg"], ".1f"),
            fmt(stay["discharge_weight_kg"], ".1f"),
            fmt(stay["unit_location_id"]),
            fmt(stay["unit_type"]),
            fmt(stay["unit_stay_type"]),
            fmt(stay["unit_admit_source"]),
            fmt(stay["hospital_admit_source"]),
            fmt(stay["hospital_admit_offset_min"], ".0f"),
            str(stay["icu_visit_number"]),
            fmt(stay["admission_dx"]),
            str(stay["unit_admit_year"]),
        )
        stays.append(
            PatientStay(
                patient_unit_stay_id=stay["patient_unit_stay_id"],
                patient_id=stay["patient_id"],
                gender=stay["gender"],
                age=min(stay["age"], 90),
                ethnicity=stay["ethnicity"],
                height_cm=None if stay["height_cm"] is None else round(stay["height_cm"], 1),
                admit_weight_kg=None if stay["admit_weight_kg"] is None else round(stay["admit_weight_kg"], 1),
                discharge_weight_kg=None if stay["discharge_weight_kg"] is None else round(stay["discharge_weight_kg"], 1),
                unit_location_id=stay["unit_location_id"],
                unit_type=stay["unit_type"],
                unit_stay_type=stay["unit_stay_type"],
                unit_admit_source=stay["unit_admit_source"],
                hospital_admit_source=stay["hospital_admit_source"],
                hospital_admit_offset_min=None if stay["hospital_admit_offset_min"] is None
                else float(format(stay["hospital_admit_offset_min"], ".0f")),
                icu_visit_number=stay["icu_visit_number"],
                admission_dx=stay["admission_dx"],
                unit_admit_year=stay["unit_admit_year"],
                raw=raw,
            )
        )

    tests = []
    for draft in drafts:
        stay = stay_dicts[draft.stay_index]
        label = SensitivityLabel.RESISTANT if labels[draft.test_index] else SensitivityLabel.SENSITIVE
        test_id = f"T{draft.test_index + 1:07d}"
        raw = (
            test_id,
            stay["patient_unit_stay_id"],
            format(draft.offset_min, ".0f"),
            str(stay["unit_admit_year"]),
            fmt(draft.site),
            draft.organism,
            draft.antibiotic,
            label.value,
        )
        tests.append(
            MicrobiologyTest(
                test_id=test_id,
                patient_unit_stay_id=stay["patient_unit_stay_id"],
                culture_taken_offset_min=float(format(draft.offset_min, ".0f")),
                culture_taken_year=stay["unit_admit_year"],
                culture_site=draft.site,
                organism=draft.organism,
                antibiotic=draft.antibiotic,
                sensitivity=label,
                raw=raw,
            )
        )
    return Cohort(stays=tuple(stays), tests=tuple(tests))


def write_synthetic_files(
    cohort: Cohort,
    truth: GroundTruth,
    out_dir: str | Path,
    header: dict | None = None,
    stays_path: str | Path | None = None,
    micro_path: str | Path | None = None,
) -> dict[str, Path]:
    """Emit stays.csv, micro.csv and ground_truth.json.

    The table paths default to ``out_dir`` but can be pointed wherever a run
    configuration expects to read them.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    comment = None
    if header:
        comment = (
            f"amrbench {header.get('toolkit_version', '?')} "
            f"config_sha256={header.get('config_sha256', 'none')} seed={header.get('seed', 'none')}"
        )
    stays_path = Path(stays_path) if stays_path else out / "stays.csv"
    micro_path = Path(micro_path) if micro_path else out / "micro.csv"
    stays_path.parent.mkdir(parents=True, exist_ok=True)
    micro_path.parent.mkdir(parents=True, exist_ok=True)
    serialize_cohort(cohort, stays_path, micro_path, comment)

    truth_path = out / "ground_truth.json"
    payload = {
        "intercept": truth.intercept,
        "coefficients": truth.coefficients,
        "cell_year_slopes": truth.cell_year_slopes,
        "drift_base_year": truth.drift_base_year,
        "bayes_auc": truth.bayes_auc,
        "prevalence": truth.prevalence,
        "mean_prevalence_target": truth.mean_prevalence_target,
        "test_ids": truth.test_ids,
        "true_probabilities": truth.true_probabilities.tolist(),
    }
    if header:
        payload = {"header": header, **payload}
    with open(truth_path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
    return {"stays": stays_path, "micro": micro_path, "ground_truth": truth_path}


def load_ground_truth(path: str | Path) -> GroundTruth:
    with open(path) as fh:
        payload = json.load(fh)
    return GroundTruth(
        intercept=payload["intercept"],
        coefficients=payload["coefficients"],
        cell_year_slopes=payload["cell_year_slopes"],
        drift_base_year=payload["drift_base_year"],
        bayes_auc=payload["bayes_auc"],
        prevalence=payload["prevalence"],
        test_ids=payload["test_ids"],
        true_probabilities=np.asarray(payload["true_probabilities"]),
        mean_prevalence_target=payload["mean_prevalence_target"],
    )
