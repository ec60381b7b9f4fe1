"""Exception hierarchy shared across the toolkit.

Every error carries a machine-parseable category so the CLI can map it to a
stable exit code and a single-line diagnostic.
"""

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_FIT = 4
EXIT_EVAL = 5


class AmrbenchError(Exception):
    """Base class for all toolkit errors."""

    category = "error"
    exit_code = 1


class ConfigError(AmrbenchError):
    """Invalid configuration: bad paths, malformed config file, bad grids."""

    category = "config"
    exit_code = EXIT_CONFIG


class DataError(AmrbenchError):
    """Problems with input tables or row-level values."""

    category = "data"
    exit_code = EXIT_DATA


class SchemaError(DataError):
    """A required input column is missing or the header is malformed."""

    category = "data.schema"


class ParseError(DataError):
    """A cell could not be parsed; message names the row and column."""

    category = "data.parse"


class IntegrityError(DataError):
    """Referential integrity violation between the input tables."""

    category = "data.integrity"


class SplitError(DataError):
    """A dataset split cannot be formed (too few stays, empty side)."""

    category = "data.split"


class DimensionError(DataError):
    """Row width does not match what a fitted model expects."""

    category = "data.dimension"


class FitError(AmrbenchError):
    """Model fitting failed (empty input, single class, bad grid point)."""

    category = "fit"
    exit_code = EXIT_FIT


class EvalError(AmrbenchError):
    """Evaluation failed (e.g. single-class fold)."""

    category = "eval"
    exit_code = EXIT_EVAL
