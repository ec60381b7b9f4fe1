"""Run configuration: JSON file with flag overrides, hashed for provenance."""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import ConfigError
from .features import PipelineConfig
from .synth import GeneratorConfig, TemporalDrift

TOOLKIT_VERSION = "0.1.0"

DEFAULT_GRIDS = {
    "l1lr": [
        {"lambda": 0.0003},
        {"lambda": 0.001},
        {"lambda": 0.003},
        {"lambda": 0.01},
    ],
    "rf": [
        {"n_trees": 60, "max_depth": 10, "min_samples_leaf": 25, "feature_subsample": "sqrt"},
        {"n_trees": 60, "max_depth": 14, "min_samples_leaf": 10, "feature_subsample": "sqrt"},
    ],
    "gbm": [
        {"n_rounds": 120, "max_leaves": 31, "min_samples_leaf": 20, "learning_rate": 0.1},
        {"n_rounds": 120, "max_leaves": 15, "min_samples_leaf": 40, "learning_rate": 0.1},
    ],
    "nn": [
        {"hidden_sizes": [32], "max_iterations": 40, "step_size": 0.001, "batch_size": 256},
    ],
}

DEFAULT_ROSTER = ["ab", "l1lr", "rf", "nn", "gbm", "ensemble"]
DEFAULT_MODES = ["random", "temporal"]
DEFAULT_CUTOFF_YEAR = 2012


@dataclass
class ReportOptions:
    auc_time: bool = True
    roc: bool = True
    figures: bool = True
    per_organism: bool = True
    features_export: bool = False
    coefficients_top: int = 20
    fig6_min_count: int = 100


@dataclass
class RunConfig:
    seed: int = 20070331
    stays_path: Optional[Path] = None
    micro_path: Optional[Path] = None
    out_dir: Path = Path("amrbench_out")
    min_culture_offset_min: Optional[float] = None
    fractions: tuple[float, float, float] = (0.6, 0.2, 0.2)
    cutoff_year: int = DEFAULT_CUTOFF_YEAR
    modes: list[str] = field(default_factory=lambda: list(DEFAULT_MODES))
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    prior_window_minutes: float = 2880.0
    roster: list[str] = field(default_factory=lambda: list(DEFAULT_ROSTER))
    grids: dict = field(default_factory=lambda: json.loads(json.dumps(DEFAULT_GRIDS)))
    reports: ReportOptions = field(default_factory=ReportOptions)
    threads: int = 1
    synth: GeneratorConfig = field(default_factory=GeneratorConfig)
    raw: dict = field(default_factory=dict)

    def resolved_dict(self) -> dict:
        """Canonical fully-resolved representation used for hashing and echo."""
        return {
            "seed": self.seed,
            "paths": {
                "stays": str(self.stays_path) if self.stays_path else None,
                "micro": str(self.micro_path) if self.micro_path else None,
                "out_dir": str(self.out_dir),
            },
            "cohort": {"min_culture_offset_min": self.min_culture_offset_min},
            "split": {
                "fractions": list(self.fractions),
                "cutoff_year": self.cutoff_year,
                "modes": self.modes,
            },
            "pipeline": {
                "ttest_p_threshold": self.pipeline.ttest_p_threshold,
                "correlation_threshold": self.pipeline.correlation_threshold,
                "winsor_lower_pct": self.pipeline.winsor_lower_pct,
                "winsor_upper_pct": self.pipeline.winsor_upper_pct,
                "prior_window_minutes": self.prior_window_minutes,
            },
            "models": {"roster": self.roster, "grids": self.grids},
            "reports": {
                "auc_time": self.reports.auc_time,
                "roc": self.reports.roc,
                "figures": self.reports.figures,
                "per_organism": self.reports.per_organism,
                "features_export": self.reports.features_export,
                "coefficients_top": self.reports.coefficients_top,
                "fig6_min_count": self.reports.fig6_min_count,
            },
            "threads": self.threads,
            "synth": _generator_config_dict(self.synth),
        }

    def config_hash(self) -> str:
        canonical = json.dumps(self.resolved_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    def header_comment(self) -> str:
        return f"amrbench {TOOLKIT_VERSION} config_sha256={self.config_hash()[:16]} seed={self.seed}"

    def header_dict(self) -> dict:
        return {
            "toolkit_version": TOOLKIT_VERSION,
            "config_sha256": self.config_hash()[:16],
            "seed": self.seed,
        }


def _generator_config_dict(config: GeneratorConfig) -> dict:
    return {
        "seed": config.seed,
        "n_stays": config.n_stays,
        "revisit_rate": config.revisit_rate,
        "repeat_key_rate": config.repeat_key_rate,
        "cell_base_sd": config.cell_base_sd,
        "tests_per_stay_mean": config.tests_per_stay_mean,
        "tests_per_stay_min": config.tests_per_stay_min,
        "mean_prevalence": config.mean_prevalence,
        "year_weights": {str(k): v for k, v in config.year_weights.items()},
        "organism_weights": config.organism_weights,
        "antibiotic_weights": config.antibiotic_weights,
        "planted_coefficients": config.planted_coefficients,
        "temporal_drift": {
            "base_year": config.temporal_drift.base_year,
            "per_year": config.temporal_drift.per_year,
            "cell_slope_sd": config.temporal_drift.cell_slope_sd,
            "reversion": config.temporal_drift.reversion,
        },
        "missing_rates": config.missing_rates,
    }


def _generator_config_from_dict(payload: dict, seed: int) -> GeneratorConfig:
    config = GeneratorConfig(seed=payload.get("seed", seed))
    for key in (
        "n_stays", "revisit_rate", "repeat_key_rate", "cell_base_sd",
        "tests_per_stay_mean", "tests_per_stay_min", "mean_prevalence",
    ):
        if key in payload:
            setattr(config, key, payload[key])
    if "year_weights" in payload:
        config.year_weights = {int(k): float(v) for k, v in payload["year_weights"].items()}
    for key in ("organism_weights", "antibiotic_weights", "planted_coefficients", "missing_rates"):
        if key in payload:
            setattr(config, key, dict(payload[key]))
    drift = payload.get("temporal_drift")
    if drift is not None:
        config.temporal_drift = TemporalDrift(
            base_year=drift.get("base_year", 2010),
            per_year=drift.get("per_year", 0.05),
            cell_slope_sd=drift.get("cell_slope_sd", 0.25),
            reversion=drift.get("reversion", 0.15),
        )
    return config


def load_run_config(
    path: Optional[str | Path] = None,
    overrides: Optional[dict] = None,
) -> RunConfig:
    """Build a RunConfig from a JSON file plus CLI flag overrides."""
    payload: dict = {}
    if path is not None:
        config_path = Path(path)
        if not config_path.exists():
            raise ConfigError(f"config file not found: {config_path}")
        try:
            with open(config_path) as fh:
                payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {config_path} is not valid JSON: {exc}") from None
    overrides = overrides or {}

    config = RunConfig(raw=payload)
    if "seed" in payload:
        config.seed = int(payload["seed"])
    if overrides.get("seed") is not None:
        config.seed = int(overrides["seed"])

    paths = payload.get("paths", {})
    if paths.get("stays"):
        config.stays_path = Path(paths["stays"])
    if paths.get("micro"):
        config.micro_path = Path(paths["micro"])
    if paths.get("out_dir"):
        config.out_dir = Path(paths["out_dir"])
    if overrides.get("out_dir") is not None:
        config.out_dir = Path(overrides["out_dir"])

    cohort = payload.get("cohort", {})
    if cohort.get("min_culture_offset_min") is not None:
        config.min_culture_offset_min = float(cohort["min_culture_offset_min"])
    if overrides.get("min_culture_offset") is not None:
        config.min_culture_offset_min = float(overrides["min_culture_offset"])

    split = payload.get("split", {})
    if "fractions" in split:
        fractions = tuple(float(f) for f in split["fractions"])
        if len(fractions) != 3:
            raise ConfigError(f"split.fractions needs 3 entries, got {len(fractions)}")
        if abs(sum(fractions) - 1.0) > 1e-9 or any(f <= 0 for f in fractions):
            raise ConfigError(f"split.fractions must be positive and sum to 1: {fractions}")
        config.fractions = fractions
    if "cutoff_year" in split:
        config.cutoff_year = int(split["cutoff_year"])
    if overrides.get("cutoff_year") is not None:
        config.cutoff_year = int(overrides["cutoff_year"])
    if "modes" in split:
        config.modes = list(split["modes"])
    if overrides.get("split_mode"):
        config.modes = [overrides["split_mode"]]
    for mode in config.modes:
        if mode not in ("random", "temporal"):
            raise ConfigError(f"unknown split mode {mode!r}")

    pipeline = payload.get("pipeline", {})
    config.pipeline = PipelineConfig(
        ttest_p_threshold=pipeline.get("ttest_p_threshold", 0.1),
        correlation_threshold=pipeline.get("correlation_threshold", 0.75),
        winsor_lower_pct=pipeline.get("winsor_lower_pct", 0.5),
        winsor_upper_pct=pipeline.get("winsor_upper_pct", 99.5),
    )
    config.prior_window_minutes = float(pipeline.get("prior_window_minutes", 2880.0))

    models = payload.get("models", {})
    if "roster" in models:
        config.roster = list(models["roster"])
        unknown = set(config.roster) - set(DEFAULT_ROSTER)
        if unknown:
            raise ConfigError(f"unknown models in roster: {sorted(unknown)}")
    grids = models.get("grids", {})
    for family, grid in grids.items():
        if family not in DEFAULT_GRIDS:
            raise ConfigError(f"unknown grid family {family!r}")
        if not grid:
            raise ConfigError(f"grid for {family!r} is empty")
        config.grids[family] = grid

    reports = payload.get("reports", {})
    config.reports = ReportOptions(
        auc_time=reports.get("auc_time", True),
        roc=reports.get("roc", True),
        figures=reports.get("figures", True),
        per_organism=reports.get("per_organism", True),
        features_export=reports.get("features_export", False),
        coefficients_top=int(reports.get("coefficients_top", 20)),
        fig6_min_count=int(reports.get("fig6_min_count", 100)),
    )

    threads = payload.get("threads", 1)
    if overrides.get("threads") is not None:
        threads = overrides["threads"]
    elif os.environ.get("AMRBENCH_THREADS"):
        try:
            threads = int(os.environ["AMRBENCH_THREADS"])
        except ValueError:
            raise ConfigError(
                f"AMRBENCH_THREADS must be an integer, got {os.environ['AMRBENCH_THREADS']!r}"
            ) from None
    config.threads = int(threads)
    if config.threads < 1:
        raise ConfigError(f"threads must be >= 1, got {config.threads}")

    config.synth = _generator_config_from_dict(payload.get("synth", {}), config.seed)
    return config
