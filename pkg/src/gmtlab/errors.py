"""Exception types shared across the package.

The CLI maps these onto exit codes: bad arguments / unknown config keys are
usage errors (exit 2), everything else raised mid-run is a runtime failure
(exit 3).
"""


class GmtLabError(Exception):
    """Base class for errors raised by this package."""


class ArgumentError(GmtLabError, ValueError):
    """Invalid argument: dimension mismatch, out-of-range parameter, bad key."""


class UnsupportedOperationError(GmtLabError):
    """Operation not defined for this input (e.g. derivatives of a non-smooth phase)."""


class SingularityError(GmtLabError):
    """Evaluation at a singular configuration (e.g. distance phase at x == y)."""


class EmptyLevelError(GmtLabError):
    """A level-set query produced no points / no band cells at all."""


class FitError(GmtLabError):
    """A regression had too few or degenerate data points."""


class GridMismatchError(GmtLabError, ValueError):
    """Raster algebra attempted across different grids."""
