"""Exception hierarchy for reservoir ICA.

Every error derives from ReservoirIcaError and from the builtin it refines, so
callers can catch either the package base class or plain ValueError/RuntimeError.
"""


class ReservoirIcaError(Exception):
    """Base class for all package errors."""


class ConfigurationError(ReservoirIcaError, ValueError):
    """Invalid parameter, unknown name or inconsistent combination."""


class DegenerateSignalError(ReservoirIcaError, ValueError):
    """A signal has zero variance where a non-degenerate one is required."""


class DataError(ReservoirIcaError, ValueError):
    """Input samples are non-finite or otherwise unusable."""


class DimensionError(ReservoirIcaError, ValueError):
    """Array shapes do not agree."""


class ReservoirModeError(ReservoirIcaError, ValueError):
    """Operation called on a reservoir built in the other mode."""


class NumericalError(ReservoirIcaError, ArithmeticError):
    """A numerical routine failed or produced non-finite values.

    Attributes:
        step: 1-based sample index at which the failure occurred, if known
    """

    def __init__(self, message: str, step: int | None = None):
        self.step = step
        if step is not None:
            message = f"{message} (at step {step})"
        super().__init__(message)


class NotReadyError(ReservoirIcaError, RuntimeError):
    """State has not been initialized far enough for the requested operation."""


class MetricError(ReservoirIcaError, ValueError):
    """A metric is undefined for the given inputs."""


class AggregationError(ReservoirIcaError, ValueError):
    """Rows passed to aggregation do not share a grouping key."""
