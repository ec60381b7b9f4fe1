"""End-to-end study orchestration behind the `run` subcommand.

One run executes: ingest -> cohort filter -> split -> fit pipeline ->
fit/tune all models -> evaluate -> write every report file. When both split
modes are configured, the whole protocol repeats per mode and the AUC table
carries one column per mode, as in a temporal-effects comparison.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import eval as evalmod
from .config import RunConfig
from .errors import ConfigError, FitError
from .features import (
    AssembledRows,
    FeatureMatrix,
    PipelineState,
    apply_pipeline,
    assemble_rows,
    fit_pipeline,
    save_pipeline_state,
    write_features_csv,
)
from .ingest import STUDY_ORGANISMS, apply_cohort_filter, load_tables
from .models import (
    RandomForestParams,
    GbmParams,
    MlpParams,
    ensemble_average,
    fit_antibiogram,
    fit_gbm,
    fit_l1_logistic,
    fit_mlp,
    fit_random_forest,
    save_model,
    tune_hyperparameters,
)
from .splits import Fold, SplitAssignment, SplitMode, SplitSpec, make_split

logger = logging.getLogger(__name__)

# Stable seed offsets so each (mode, family) fit draws an independent stream.
_MODE_SEED_OFFSET = {"random": 0, "temporal": 1000}
_FAMILY_SEED_OFFSET = {"rf": 11, "gbm": 12, "nn": 13}


def _rf_params(point: dict) -> RandomForestParams:
    return RandomForestParams(
        n_trees=point.get("n_trees", 100),
        max_depth=point.get("max_depth", 12),
        min_samples_leaf=point.get("min_samples_leaf", 10),
        feature_subsample=point.get("feature_subsample", "sqrt"),
        max_bins=point.get("max_bins", 64),
    )


def _gbm_params(point: dict) -> GbmParams:
    return GbmParams(
        n_rounds=point.get("n_rounds", 100),
        max_leaves=point.get("max_leaves", 31),
        min_samples_leaf=point.get("min_samples_leaf", 20),
        learning_rate=point.get("learning_rate", 0.1),
        hessian_reg=point.get("hessian_reg", 1.0),
        feature_fraction=point.get("feature_fraction", 1.0),
        max_bins=point.get("max_bins", 64),
    )


def _mlp_params(point: dict) -> MlpParams:
    return MlpParams(
        hidden_sizes=tuple(point.get("hidden_sizes", [32])),
        max_iterations=point.get("max_iterations", 200),
        step_size=point.get("step_size", 1e-3),
        batch_size=point.get("batch_size", 128),
    )


@dataclass
class ModeResult:
    mode: str
    state: PipelineState
    assignment: SplitAssignment
    models: dict = field(default_factory=dict)
    tuned_params: dict = field(default_factory=dict)
    aucs: dict = field(default_factory=dict)
    test: Optional[FeatureMatrix] = None
    train: Optional[FeatureMatrix] = None
    validation: Optional[FeatureMatrix] = None
    per_organism: list = field(default_factory=list)


def fit_mode_models(
    train: FeatureMatrix,
    validation: FeatureMatrix,
    trainval: FeatureMatrix,
    grids: dict,
    roster: list[str],
    seed: int,
) -> tuple[dict, dict]:
    """Tune and fit every requested model family; AB fits on train+validation."""
    models: dict = {}
    tuned: dict = {}
    if "ab" in roster:
        models["ab"] = fit_antibiogram(trainval)
    if "l1lr" in roster:
        result = tune_hyperparameters(
            lambda tr, hp: fit_l1_logistic(tr, lam=hp["lambda"]),
            grids["l1lr"], train, validation,
        )
        models["l1lr"] = result.best_model
        tuned["l1lr"] = result.best_params
    if "rf" in roster:
        result = tune_hyperparameters(
            lambda tr, hp: fit_random_forest(tr, _rf_params(hp), seed=seed + _FAMILY_SEED_OFFSET["rf"]),
            grids["rf"], train, validation,
        )
        models["rf"] = result.best_model
        tuned["rf"] = result.best_params
    if "nn" in roster:
        result = tune_hyperparameters(
            lambda tr, hp: fit_mlp(tr, _mlp_params(hp), seed=seed + _FAMILY_SEED_OFFSET["nn"]),
            grids["nn"], train, validation,
        )
        models["nn"] = result.best_model
        tuned["nn"] = result.best_params
    if "gbm" in roster:
        result = tune_hyperparameters(
            lambda tr, hp: fit_gbm(tr, _gbm_params(hp), seed=seed + _FAMILY_SEED_OFFSET["gbm"]),
            grids["gbm"], train, validation,
        )
        models["gbm"] = result.best_model
        tuned["gbm"] = result.best_params
    if "ensemble" in roster:
        missing = [k for k in ("nn", "gbm", "rf") if k not in models]
        if missing:
            raise FitError(f"ensemble requires nn, gbm and rf in the roster; missing {missing}")
        models["ensemble"] = ensemble_average([models["nn"], models["gbm"], models["rf"]])
    return models, tuned


def run_mode(
    assembled: AssembledRows,
    mode: str,
    config: RunConfig,
) -> ModeResult:
    """Split, fit the pipeline and all models, and evaluate one mode."""
    spec = SplitSpec(
        mode=SplitMode.RANDOM_BY_STAY if mode == "random" else SplitMode.TEMPORAL_BY_YEAR,
        seed=config.seed,
        fractions=config.fractions,
        cutoff_year=config.cutoff_year,
    )
    assignment = make_split(assembled, spec)
    train_idx = assignment.indices(Fold.TRAIN)
    val_idx = assignment.indices(Fold.VALIDATION)
    test_idx = assignment.indices(Fold.TEST)

    train_rows = assembled.subset(train_idx)
    state = fit_pipeline(train_rows, config.pipeline)
    train = apply_pipeline(train_rows, state)
    validation = apply_pipeline(assembled.subset(val_idx), state)
    test = apply_pipeline(assembled.subset(test_idx), state)
    trainval = apply_pipeline(assembled.subset(np.concatenate([train_idx, val_idx])), state)

    seed = config.seed + _MODE_SEED_OFFSET[mode]
    models, tuned = fit_mode_models(
        train, validation, trainval, config.grids, config.roster, seed
    )
    aucs = evalmod.evaluate_all(models, test)
    logger.info("mode %s AUCs: %s", mode, {k: round(v, 4) for k, v in aucs.items()})

    result = ModeResult(
        mode=mode,
        state=state,
        assignment=assignment,
        models=models,
        tuned_params=tuned,
        aucs=aucs,
        test=test,
        train=train,
        validation=validation,
    )
    if config.reports.per_organism and "l1lr" in models and "ab" in models:
        result.per_organism = per_organism_results(
            train, test, models["ab"], tuned.get("l1lr", {}).get("lambda", 0.001)
        )
    return result


def per_organism_results(train: FeatureMatrix, test: FeatureMatrix, ab_model, lam: float):
    """Per-organism logistic models at the globally tuned regularization."""
    models = {}
    train_organisms = np.asarray(train.organisms)
    for organism in STUDY_ORGANISMS:
        idx = np.flatnonzero(train_organisms == organism)
        if idx.size == 0:
            models[organism] = None
            continue
        sub = train.subset(idx)
        if sub.labels.min() == sub.labels.max():
            models[organism] = None
            continue
        models[organism] = fit_l1_logistic(sub, lam=lam)
    return evalmod.evaluate_per_organism(test, models, ab_model)


def run_study(config: RunConfig) -> dict:
    """Execute the full batch study and write every report file."""
    if config.stays_path is None or config.micro_path is None:
        raise ConfigError("run requires paths.stays and paths.micro in the config")
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    comment = config.header_comment()
    header = config.header_dict()

    cohort = load_tables(config.stays_path, config.micro_path)
    cohort = apply_cohort_filter(cohort, config.min_culture_offset_min)
    assembled = assemble_rows(cohort, window_minutes=config.prior_window_minutes)

    results: dict[str, ModeResult] = {}
    for mode in config.modes:
        results[mode] = run_mode(assembled, mode, config)

    _write_reports(assembled, results, config, out, comment, header)
    return {
        "out_dir": out,
        "aucs": {mode: results[mode].aucs for mode in results},
        "n_tests": assembled.n_rows,
    }


def _write_reports(
    assembled: AssembledRows,
    results: dict[str, ModeResult],
    config: RunConfig,
    out: Path,
    comment: str,
    header: dict,
) -> None:
    random_aucs = results.get("random").aucs if "random" in results else {}
    temporal_aucs = results.get("temporal").aucs if "temporal" in results else {}
    roster_rows = []
    for name in evalmod.MODEL_ROSTER:
        if name not in config.roster:
            continue
        roster_rows.append((name, random_aucs.get(name), temporal_aucs.get(name)))
    evalmod.write_auc_report(out / "report_auc.csv", roster_rows, comment)

    primary = results.get("random") or next(iter(results.values()))
    if primary.per_organism:
        evalmod.write_organism_report(out / "report_organism.csv", primary.per_organism, comment)
    if "l1lr" in primary.models:
        model = primary.models["l1lr"]
        evalmod.write_coefficient_report(
            out / "report_coefficients.csv",
            model.feature_names,
            model.weights,
            comment,
            top=config.reports.coefficients_top,
        )

    for mode, result in results.items():
        save_pipeline_state(result.state, out / f"pipeline.state.{mode}.json", header)
        result.assignment.export(assembled.test_ids, out / f"splits_{mode}.csv", comment)
        for name, model in result.models.items():
            save_model(model, out / f"model_{name}_{mode}.json", header)
        if config.reports.roc:
            for name, model in result.models.items():
                curve = evalmod.roc_curve(model.predict(result.test), result.test.labels)
                evalmod.write_roc_csv(out / f"roc_{name}_{mode}.csv", curve, comment)
        if config.reports.features_export:
            write_features_csv(result.train, out / f"features_train_{mode}.csv", comment)
            write_features_csv(result.test, out / f"features_test_{mode}.csv", comment)

    if config.reports.figures:
        rates, totals, resistant = evalmod.summarize_rates(
            assembled.organisms, assembled.antibiotics, assembled.labels
        )
        evalmod.write_grid_csv(out / "fig3_rates.csv", rates, "rate", comment)
        evalmod.write_grid_csv(out / "fig4_counts.csv", totals, "count", comment, integer=True)
        evalmod.write_grid_csv(
            out / "fig5_resistant_counts.csv", resistant, "resistant_count", comment, integer=True
        )
        series = evalmod.rates_over_time(
            assembled.organisms,
            assembled.antibiotics,
            assembled.culture_years,
            assembled.labels,
            min_count=config.reports.fig6_min_count,
        )
        evalmod.write_yearly_csv(out / "fig6_yearly.csv", series, comment)


def validate_study(config: RunConfig) -> dict:
    """Schema and cohort diagnostics without fitting anything."""
    if config.stays_path is None or config.micro_path is None:
        raise ConfigError("validate requires paths.stays and paths.micro in the config")
    cohort = load_tables(config.stays_path, config.micro_path)
    filtered = apply_cohort_filter(cohort, config.min_culture_offset_min)
    labels = [t.sensitivity.value for t in filtered.tests]
    from collections import Counter

    counts = Counter(labels)
    resistant = counts.get("Resistant", 0)
    diagnostics = {
        "stays_loaded": len(cohort.stays),
        "tests_loaded": len(cohort.tests),
        "stays_in_cohort": len(filtered.stays),
        "tests_in_cohort": len(filtered.tests),
        "label_counts": dict(sorted(counts.items())),
        "resistant_rate": (resistant / len(filtered.tests)) if filtered.tests else None,
        "organisms": sorted({t.organism for t in filtered.tests}),
        "antibiotics": sorted({t.antibiotic for t in filtered.tests}),
        "years": sorted({s.unit_admit_year for s in filtered.stays}),
    }
    return diagnostics
