"""Exception hierarchy shared across the package."""


class CompletionError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(CompletionError):
    """Shapes, lengths, or index bounds do not agree."""


class ConfigError(CompletionError):
    """A parameter, plan, or CLI option is out of its admissible range."""


class DataError(CompletionError):
    """Input data could not be parsed or failed validation."""


class NumericError(CompletionError):
    """A numerical routine failed to converge or produced non-finite values."""


class MetricError(CompletionError):
    """A metric is undefined for the given inputs (empty set, zero denominator)."""


class DegenerateInputError(CompletionError):
    """An input is structurally empty for the requested operation."""
