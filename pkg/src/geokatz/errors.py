"""Exception hierarchy.

Exceptions are grouped by the CLI exit code they map onto:
1 = configuration error, 2 = data error, 3 = numeric/convergence error.
Plain ValueError is still used for programming errors (bad arguments to
library functions) that a config file can never trigger.
"""


class GeokatzError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(GeokatzError):
    """Invalid or inconsistent run configuration."""

    exit_code = 1


class DataError(GeokatzError):
    """Problem with the input data or derived structures."""

    exit_code = 2


class SchemaError(DataError):
    """Input file is missing a required column."""


class RowError(DataError):
    """A data row failed validation (raised only in abort mode)."""


class EmptyNetworkError(DataError):
    """No usable records to build a network from."""


class EmptySplitError(DataError):
    """A temporal split interval captured zero edges."""


class UniverseMismatchError(DataError):
    """Two score tables do not share a candidate-pair universe."""


class DegenerateLabelsError(DataError):
    """Labels contain only one class where both are required."""


class NumericError(GeokatzError):
    """Numerical failure (divergence, ill-posed solve)."""

    exit_code = 3


class BetaDomainError(NumericError):
    """Damping factor outside (0, 1/spectral_radius): series diverges."""


class DegenerateScoreTableWarning(UserWarning):
    """All scores in a table are identical; normalization maps them to 0."""
