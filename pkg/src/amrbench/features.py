"""Feature generation and pre-processing pipeline.

The pipeline runs in a fixed step order: anti-organism interactions, prior
resistance history, time transforms, one-hot encoding, winsorization,
median imputation, t-test selection, correlated-column elimination, and
min-max scaling. Every statistic is fitted on training rows only and
replayed verbatim on other rows, so held-out data can never influence the
fitted state.
"""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import special

from .errors import ConfigError, EvalError, SchemaError
from .ingest import Cohort, MicrobiologyTest, binarize_label

logger = logging.getLogger(__name__)

PIPELINE_STATE_VERSION = 1

# Prior resistance results are only usable once the lab turnaround (24-48 h)
# has elapsed, so anything younger than 48 h is invisible to the models.
PRIOR_WINDOW_MINUTES = 2880.0

MINUTES_PER_DAY = 1440.0

NUMERIC_FEATURES = (
    "age",
    "height_cm",
    "admit_weight_kg",
    "hosp_admit_days",
    "hosp_admit_log_days",
    "culture_days",
    "culture_log_days",
    "icu_visit_number",
    "unit_admit_year",
    "culture_taken_year",
    "y_pre",
)

WINSORIZED_FEATURES = (
    "height_cm",
    "admit_weight_kg",
    "hosp_admit_days",
    "hosp_admit_log_days",
    "culture_days",
    "culture_log_days",
)

# source column -> one-hot name prefix; anti_organism keys are already
# prefixed "ao_" so they are used verbatim as column names.
CATEGORICAL_FEATURES = (
    ("anti_organism", None),
    ("organism", "organism"),
    ("antibiotic", "antibiotic"),
    ("gender", "gender"),
    ("ethnicity", "ethnicity"),
    ("unit_location_id", "locationid"),
    ("unit_type", "unit_type"),
    ("unit_stay_type", "unit_stay_type"),
    ("unit_admit_source", "unit_admit_source"),
    ("hospital_admit_source", "hospital_admit_source"),
    ("admission_dx", "apacheadmissiondx"),
    ("culture_site", "culture_site"),
)


def make_anti_organism(antibiotic: str, organism: str) -> str:
    """Interaction key for one antibiotic-organism pair."""
    return f"ao_{antibiotic}_{organism}"


def transform_times(offset_min: float) -> tuple[float, float]:
    """Minutes-from-admit to (days, log-days); log uses ln(1+days) floored at 0."""
    days = offset_min / MINUTES_PER_DAY
    return days, float(np.log1p(max(days, 0.0)))


def compute_prior_resistance(
    tests: Sequence[MicrobiologyTest],
    current: MicrobiologyTest,
    window_minutes: float = PRIOR_WINDOW_MINUTES,
) -> Optional[float]:
    """Mean resistance of the patient's earlier same-key tests, > 48 h old.

    Within one stay the gap is exact from culture offsets. Across stays only
    calendar years are available, so an earlier-year test counts as older
    than 48 h while a same-year test from another stay is excluded as
    time-unresolvable.
    """
    key = make_anti_organism(current.antibiotic, current.organism)
    outcomes = []
    for test in tests:
        if test.test_id == current.test_id:
            continue
        if make_anti_organism(test.antibiotic, test.organism) != key:
            continue
        if test.patient_unit_stay_id == current.patient_unit_stay_id:
            if current.culture_taken_offset_min - test.culture_taken_offset_min > window_minutes:
                outcomes.append(binarize_label(test.sensitivity))
        elif test.culture_taken_year < current.culture_taken_year:
            outcomes.append(binarize_label(test.sensitivity))
    if not outcomes:
        return None
    return float(np.mean(outcomes))


@dataclass
class AssembledRows:
    """Per-test rows after feature generation, before the fitted transforms.

    ``numeric`` holds float arrays with NaN as missing; ``categorical`` holds
    raw string values with None as missing. Metadata arrays (keys, labels,
    groups, years) ride along for splitting, the antibiogram and reports.
    """
    test_ids: list[str]
    group_ids: list[str]
    patient_ids: list[str]
    labels: np.ndarray
    ao_keys: list[str]
    organisms: list[str]
    antibiotics: list[str]
    admit_years: np.ndarray
    culture_years: np.ndarray
    numeric: dict[str, np.ndarray]
    categorical: dict[str, list]

    @property
    def n_rows(self) -> int:
        return len(self.test_ids)

    def subset(self, indices: np.ndarray) -> "AssembledRows":
        idx = np.asarray(indices)
        take = lambda xs: [xs[i] for i in idx]
        return AssembledRows(
            test_ids=take(self.test_ids),
            group_ids=take(self.group_ids),
            patient_ids=take(self.patient_ids),
            labels=self.labels[idx],
            ao_keys=take(self.ao_keys),
            organisms=take(self.organisms),
            antibiotics=take(self.antibiotics),
            admit_years=self.admit_years[idx],
            culture_years=self.culture_years[idx],
            numeric={k: v[idx] for k, v in self.numeric.items()},
            categorical={k: take(v) for k, v in self.categorical.items()},
        )


def assemble_rows(cohort: Cohort, window_minutes: float = PRIOR_WINDOW_MINUTES) -> AssembledRows:
    """Join tests with their stays and generate the derived features."""
    stay_by_id = cohort.stay_by_id()
    by_patient: dict[str, list[MicrobiologyTest]] = {}
    for test in cohort.tests:
        patient = stay_by_id[test.patient_unit_stay_id].patient_id
        by_patient.setdefault(patient, []).append(test)

    n = len(cohort.tests)
    numeric = {name: np.full(n, np.nan) for name in NUMERIC_FEATURES}
    numeric["discharge_weight_kg"] = np.full(n, np.nan)  # imputation donor only
    categorical: dict[str, list] = {name: [None] * n for name, _ in CATEGORICAL_FEATURES}

    test_ids, group_ids, patient_ids = [], [], []
    labels = np.zeros(n, dtype=np.int8)
    ao_keys, organisms, antibiotics = [], [], []
    admit_years = np.zeros(n, dtype=np.int64)
    culture_years = np.zeros(n, dtype=np.int64)

    for i, test in enumerate(cohort.tests):
        stay = stay_by_id[test.patient_unit_stay_id]
        key = make_anti_organism(test.antibiotic, test.organism)
        test_ids.append(test.test_id)
        group_ids.append(stay.patient_unit_stay_id)
        patient_ids.append(stay.patient_id)
        labels[i] = binarize_label(test.sensitivity)
        ao_keys.append(key)
        organisms.append(test.organism)
        antibiotics.append(test.antibiotic)
        admit_years[i] = stay.unit_admit_year
        culture_years[i] = test.culture_taken_year

        numeric["age"][i] = stay.age
        if stay.height_cm is not None:
            numeric["height_cm"][i] = stay.height_cm
        if stay.admit_weight_kg is not None:
            numeric["admit_weight_kg"][i] = stay.admit_weight_kg
        if stay.discharge_weight_kg is not None:
            numeric["discharge_weight_kg"][i] = stay.discharge_weight_kg
        if stay.hospital_admit_offset_min is not None:
            days, log_days = transform_times(stay.hospital_admit_offset_min)
            numeric["hosp_admit_days"][i] = days
            numeric["hosp_admit_log_days"][i] = log_days
        days, log_days = transform_times(test.culture_taken_offset_min)
        numeric["culture_days"][i] = days
        numeric["culture_log_days"][i] = log_days
        numeric["icu_visit_number"][i] = stay.icu_visit_number
        numeric["unit_admit_year"][i] = stay.unit_admit_year
        numeric["culture_taken_year"][i] = test.culture_taken_year

        y_pre = compute_prior_resistance(
            by_patient[stay.patient_id], test, window_minutes=window_minutes
        )
        if y_pre is not None:
            numeric["y_pre"][i] = y_pre

        categorical["anti_organism"][i] = key
        categorical["organism"][i] = test.organism
        categorical["antibiotic"][i] = test.antibiotic
        categorical["gender"][i] = stay.gender
        categorical["ethnicity"][i] = stay.ethnicity
        categorical["unit_location_id"][i] = stay.unit_location_id
        categorical["unit_type"][i] = stay.unit_type
        categorical["unit_stay_type"][i] = stay.unit_stay_type
        categorical["unit_admit_source"][i] = stay.unit_admit_source
        categorical["hospital_admit_source"][i] = stay.hospital_admit_source
        categorical["admission_dx"][i] = stay.admission_dx
        categorical["culture_site"][i] = test.culture_site

    return AssembledRows(
        test_ids=test_ids,
        group_ids=group_ids,
        patient_ids=patient_ids,
        labels=labels,
        ao_keys=ao_keys,
        organisms=organisms,
        antibiotics=antibiotics,
        admit_years=admit_years,
        culture_years=culture_years,
        numeric=numeric,
        categorical=categorical,
    )


def one_hot_encode(values: Sequence, vocabulary: Sequence[str]) -> np.ndarray:
    """0/1 indicator matrix, one column per vocabulary entry.

    Values outside the vocabulary (or missing) encode as all-zeros.
    """
    index = {category: j for j, category in enumerate(vocabulary)}
    out = np.zeros((len(values), len(vocabulary)))
    for i, value in enumerate(values):
        j = index.get(value)
        if j is not None:
            out[i, j] = 1.0
    return out


def fit_winsor_bounds(
    values: np.ndarray, lower_pct: float = 0.5, upper_pct: float = 99.5
) -> tuple[float, float]:
    """Percentile clamp bounds from observed values, linear interpolation."""
    observed = values[~np.isnan(values)]
    if observed.size == 0:
        raise ConfigError("cannot fit winsor bounds on an all-missing column")
    lower, upper = np.percentile(observed, [lower_pct, upper_pct])
    return float(lower), float(upper)


def winsorize(values: np.ndarray, bounds: tuple[float, float]) -> np.ndarray:
    """Clamp into the closed interval [lower, upper]; NaN passes through."""
    lower, upper = bounds
    if lower > upper:
        raise ConfigError(f"winsor bounds out of order: {lower} > {upper}")
    return np.clip(values, lower, upper)


def minmax_scale(values: np.ndarray, bounds: tuple[float, float]) -> np.ndarray:
    """Map to [0,1] using training bounds; a constant column maps to 0."""
    lo, hi = bounds
    if hi == lo:
        return np.zeros_like(values)
    return np.clip((values - lo) / (hi - lo), 0.0, 1.0)


def welch_ttest_pvalue(group_a: np.ndarray, group_b: np.ndarray) -> float:
    """Two-sided Welch t-test p-value for 'means are equal'.

    Degenerate variance (constant groups, or a singleton group) collapses to
    p=1 for equal means and p=0 otherwise.
    """
    n_a, n_b = group_a.size, group_b.size
    mean_a, mean_b = group_a.mean(), group_b.mean()
    var_a = group_a.var(ddof=1) if n_a > 1 else np.nan
    var_b = group_b.var(ddof=1) if n_b > 1 else np.nan
    se2 = var_a / n_a + var_b / n_b
    if not np.isfinite(se2) or se2 <= 0.0:
        return 1.0 if mean_a == mean_b else 0.0
    t = (mean_a - mean_b) / np.sqrt(se2)
    dof = se2 ** 2 / (
        (var_a / n_a) ** 2 / (n_a - 1) + (var_b / n_b) ** 2 / (n_b - 1)
    )
    return float(2.0 * special.stdtr(dof, -abs(t)))


def select_by_ttest(
    columns: np.ndarray,
    names: Sequence[str],
    labels: np.ndarray,
    threshold: float = 0.1,
) -> list[str]:
    """Keep columns whose class means differ at p < threshold.

    Constant columns are dropped outright (the statistic is undefined).
    """
    labels = np.asarray(labels)
    positive = labels == 1
    if positive.all() or (~positive).all():
        raise EvalError("t-test selection needs both classes present")
    kept = []
    for j, name in enumerate(names):
        col = columns[:, j]
        if np.all(col == col[0]):
            continue
        p = welch_ttest_pvalue(col[positive], col[~positive])
        if p < threshold:
            kept.append(name)
    return kept


def eliminate_correlated(
    columns: np.ndarray,
    names: Sequence[str],
    kept: Sequence[str],
    threshold: float = 0.75,
) -> list[str]:
    """Drop the later column of every pair with |Pearson r| > threshold.

    Pairs are scanned in ascending column order, so the earlier column always
    survives; the result has no remaining pair above the threshold.
    """
    order = {name: j for j, name in enumerate(names)}
    kept_idx = [order[name] for name in kept]
    sub = columns[:, kept_idx]
    with np.errstate(invalid="ignore"):
        corr = np.corrcoef(sub, rowvar=False)
    corr = np.atleast_2d(np.nan_to_num(corr, nan=0.0))
    alive = [True] * len(kept_idx)
    for a in range(len(kept_idx)):
        if not alive[a]:
            continue
        for b in range(a + 1, len(kept_idx)):
            if alive[b] and abs(corr[a, b]) > threshold:
                alive[b] = False
    return [name for name, keep in zip(kept, alive) if keep]


@dataclass
class PipelineConfig:
    ttest_p_threshold: float = 0.1
    correlation_threshold: float = 0.75
    winsor_lower_pct: float = 0.5
    winsor_upper_pct: float = 99.5


@dataclass
class ColumnSpec:
    name: str
    kind: str  # "numeric" | "indicator"
    source: str
    category: Optional[str] = None


@dataclass
class PipelineState:
    """All train-fitted transform parameters; immutable after fit."""
    vocabularies: dict[str, list[str]]
    winsor_bounds: dict[str, tuple[float, float]]
    medians: dict[str, float]
    selected_columns: list[str]
    scale_bounds: dict[str, tuple[float, float]]
    version: int = PIPELINE_STATE_VERSION

    def generated_columns(self) -> list[ColumnSpec]:
        """Full generated-column roster in deterministic order."""
        specs = [ColumnSpec(name, "numeric", name) for name in NUMERIC_FEATURES]
        for source, prefix in CATEGORICAL_FEATURES:
            for category in self.vocabularies.get(source, []):
                name = category if prefix is None else f"{prefix}_{category}"
                specs.append(ColumnSpec(name, "indicator", source, category))
        return specs


@dataclass
class FeatureMatrix:
    """Dense numeric design matrix plus per-row metadata."""
    column_names: list[str]
    rows: np.ndarray
    row_keys: list[str]
    labels: np.ndarray
    group_ids: list[str]
    ao_keys: list[str] = field(default_factory=list)
    organisms: list[str] = field(default_factory=list)
    antibiotics: list[str] = field(default_factory=list)
    admit_years: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    culture_years: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    def subset(self, indices: np.ndarray) -> "FeatureMatrix":
        idx = np.asarray(indices, dtype=np.int64)
        n = self.n_rows
        take = lambda xs: [xs[i] for i in idx] if len(xs) == n else list(xs)
        take_arr = lambda arr: arr[idx] if arr.size == n else arr.copy()
        return FeatureMatrix(
            column_names=list(self.column_names),
            rows=self.rows[idx],
            row_keys=take(self.row_keys),
            labels=self.labels[idx],
            group_ids=take(self.group_ids),
            ao_keys=take(self.ao_keys),
            organisms=take(self.organisms),
            antibiotics=take(self.antibiotics),
            admit_years=take_arr(self.admit_years),
            culture_years=take_arr(self.culture_years),
        )


def _raw_column(rows: AssembledRows, spec: ColumnSpec) -> np.ndarray:
    if spec.kind == "numeric":
        return rows.numeric[spec.source].copy()
    values = rows.categorical[spec.source]
    out = np.zeros(rows.n_rows)
    for i, value in enumerate(values):
        if value == spec.category:
            out[i] = 1.0
    return out


def _impute_numeric(rows: AssembledRows, spec: ColumnSpec, col: np.ndarray, state: PipelineState) -> np.ndarray:
    missing = np.isnan(col)
    if not missing.any():
        return col
    median = state.medians.get(spec.name)
    if median is None:
        raise ConfigError(f"no training median available for column {spec.name!r}")
    if spec.name == "admit_weight_kg":
        donor = rows.numeric["discharge_weight_kg"]
        bounds = state.winsor_bounds.get(spec.name)
        use_donor = missing & ~np.isnan(donor)
        donated = donor[use_donor]
        if bounds is not None:
            donated = winsorize(donated, bounds)
        col[use_donor] = donated
        missing = np.isnan(col)
    col[missing] = median
    return col


def impute_missing(rows: AssembledRows, spec: ColumnSpec, col: np.ndarray, state: PipelineState) -> np.ndarray:
    """Fill missing cells: admit weight falls back to discharge weight, then
    everything falls back to the training median."""
    return _impute_numeric(rows, spec, col.copy(), state)


def fit_pipeline(train: AssembledRows, config: PipelineConfig | None = None) -> PipelineState:
    """Fit every transform parameter on training rows, in pipeline order."""
    config = config or PipelineConfig()
    if train.n_rows == 0:
        raise ConfigError("cannot fit pipeline on zero rows")

    vocabularies: dict[str, list[str]] = {}
    for source, _prefix in CATEGORICAL_FEATURES:
        observed = {v for v in train.categorical[source] if v is not None}
        vocabularies[source] = sorted(observed)

    state = PipelineState(
        vocabularies=vocabularies,
        winsor_bounds={},
        medians={},
        selected_columns=[],
        scale_bounds={},
    )
    specs = state.generated_columns()

    for name in WINSORIZED_FEATURES:
        values = train.numeric[name]
        if np.isnan(values).all():
            raise ConfigError(f"column {name!r} has no observed training values")
        state.winsor_bounds[name] = fit_winsor_bounds(
            values, config.winsor_lower_pct, config.winsor_upper_pct
        )

    # Column matrix in generated order with winsorization applied, so the
    # medians and all later statistics see the clamped values.
    columns = np.empty((train.n_rows, len(specs)))
    for j, spec in enumerate(specs):
        col = _raw_column(train, spec)
        bounds = state.winsor_bounds.get(spec.name)
        if bounds is not None:
            col = winsorize(col, bounds)
        columns[:, j] = col

    for j, spec in enumerate(specs):
        if spec.kind != "numeric":
            continue
        observed = columns[:, j][~np.isnan(columns[:, j])]
        if observed.size == 0:
            raise ConfigError(f"column {spec.name!r} has no observed training values")
        state.medians[spec.name] = float(np.median(observed))

    for j, spec in enumerate(specs):
        if spec.kind == "numeric":
            columns[:, j] = _impute_numeric(train, spec, columns[:, j], state)

    names = [spec.name for spec in specs]
    kept = select_by_ttest(columns, names, train.labels, config.ttest_p_threshold)
    kept = eliminate_correlated(columns, names, kept, config.correlation_threshold)
    state.selected_columns = kept

    index = {name: j for j, name in enumerate(names)}
    for name in kept:
        col = columns[:, index[name]]
        state.scale_bounds[name] = (float(col.min()), float(col.max()))

    logger.info(
        "pipeline fitted: %d generated columns, %d selected", len(specs), len(kept)
    )
    return state


def apply_pipeline(rows: AssembledRows, state: PipelineState) -> FeatureMatrix:
    """Replay the fitted transforms on any row set; never refits anything."""
    specs = {spec.name: spec for spec in state.generated_columns()}
    out = np.empty((rows.n_rows, len(state.selected_columns)))
    for j, name in enumerate(state.selected_columns):
        spec = specs.get(name)
        if spec is None:
            raise ConfigError(f"selected column {name!r} is not a generated column")
        col = _raw_column(rows, spec)
        bounds = state.winsor_bounds.get(name)
        if bounds is not None:
            col = winsorize(col, bounds)
        if spec.kind == "numeric":
            col = _impute_numeric(rows, spec, col, state)
        out[:, j] = minmax_scale(col, state.scale_bounds[name])
    return FeatureMatrix(
        column_names=list(state.selected_columns),
        rows=out,
        row_keys=list(rows.test_ids),
        labels=rows.labels.copy(),
        group_ids=list(rows.group_ids),
        ao_keys=list(rows.ao_keys),
        organisms=list(rows.organisms),
        antibiotics=list(rows.antibiotics),
        admit_years=rows.admit_years.copy(),
        culture_years=rows.culture_years.copy(),
    )


def save_pipeline_state(state: PipelineState, path: str | Path, header: dict | None = None) -> None:
    payload = {
        "version": state.version,
        "winsor_bounds": {k: list(v) for k, v in state.winsor_bounds.items()},
        "medians": state.medians,
        "selected_columns": state.selected_columns,
        "scale_bounds": {k: list(v) for k, v in state.scale_bounds.items()},
        "vocabularies": state.vocabularies,
    }
    if header:
        payload = {"header": header, **payload}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=False)
        fh.write("\n")


def load_pipeline_state(path: str | Path) -> PipelineState:
    with open(path) as fh:
        payload = json.load(fh)
    return PipelineState(
        version=payload["version"],
        vocabularies=payload["vocabularies"],
        winsor_bounds={k: (v[0], v[1]) for k, v in payload["winsor_bounds"].items()},
        medians=payload["medians"],
        selected_columns=payload["selected_columns"],
        scale_bounds={k: (v[0], v[1]) for k, v in payload["scale_bounds"].items()},
    )


def write_features_csv(matrix: FeatureMatrix, path: str | Path, header_comment: str | None = None) -> None:
    """Export the matrix with metadata columns test_id, label, group_id, ao_key."""
    with open(path, "w", newline="\n") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["test_id", *matrix.column_names, "label", "group_id", "ao_key"])
        for i in range(matrix.n_rows):
            writer.writerow(
                [matrix.row_keys[i]]
                + [format(x, ".12g") for x in matrix.rows[i]]
                + [int(matrix.labels[i]), matrix.group_ids[i], matrix.ao_keys[i]]
            )


def read_features_csv(path: str | Path) -> FeatureMatrix:
    """Read a matrix written by :func:`write_features_csv`."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise SchemaError(f"features file {path} is empty")
    header = rows[0]
    for required in ("test_id", "label", "group_id", "ao_key"):
        if required not in header:
            raise SchemaError(f"features file {path} is missing column {required!r}")
    meta = {"test_id", "label", "group_id", "ao_key"}
    feature_cols = [(j, name) for j, name in enumerate(header) if name not in meta]
    at = {name: header.index(name) for name in meta}
    data = np.array([[float(r[j]) for j, _ in feature_cols] for r in rows[1:]])
    if data.size == 0:
        data = data.reshape(0, len(feature_cols))
    return FeatureMatrix(
        column_names=[name for _, name in feature_cols],
        rows=data,
        row_keys=[r[at["test_id"]] for r in rows[1:]],
        labels=np.array([int(r[at["label"]]) for r in rows[1:]], dtype=np.int8),
        group_ids=[r[at["group_id"]] for r in rows[1:]],
        ao_keys=[r[at["ao_key"]] for r in rows[1:]],
    )
