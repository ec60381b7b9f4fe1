"""amrbench: reproducible AMR prediction studies on tabular microbiology data."""

from .config import TOOLKIT_VERSION as __version__
from .errors import (
    AmrbenchError,
    ConfigError,
    DataError,
    DimensionError,
    EvalError,
    FitError,
    IntegrityError,
    ParseError,
    SchemaError,
    SplitError,
)
from .eval import auc, evaluate_all, evaluate_per_organism, rates_over_time, roc_curve, summarize_rates
from .features import (
    AssembledRows,
    FeatureMatrix,
    PipelineConfig,
    PipelineState,
    apply_pipeline,
    assemble_rows,
    compute_prior_resistance,
    fit_pipeline,
    make_anti_organism,
    transform_times,
)
from .ingest import (
    Cohort,
    MicrobiologyTest,
    PatientStay,
    SensitivityLabel,
    apply_cohort_filter,
    binarize_label,
    load_tables,
)
from .splits import Fold, SplitAssignment, SplitMode, SplitSpec, split_random_by_stay, split_temporal
from .synth import GeneratorConfig, GroundTruth, TemporalDrift, generate
