"""Exception types shared by the engines and the CLI."""


class OutageError(Exception):
    """Base class for numerical failures raised by this package."""


class PoleError(OutageError, ValueError):
    """Argument sits on (or numerically too close to) a pole."""


class DomainError(OutageError, ValueError):
    """Argument outside the domain of the operation."""


class ConvergenceError(OutageError, ArithmeticError):
    """An iterative evaluation stalled above its tolerance.

    ``achieved`` carries the best error estimate reached before giving up.
    """

    def __init__(self, message, achieved=float("nan")):
        super().__init__(message)
        self.achieved = achieved


class TailDivergenceError(ConvergenceError):
    """Truncated contour tail failed to shrink when the contour was extended."""


class CancellationError(OutageError, ArithmeticError):
    """Alternating permutation sum lost more digits than the precision budget allows."""

    def __init__(self, message, digits_lost=float("nan")):
        super().__init__(message)
        self.digits_lost = digits_lost


class SpectrumError(OutageError, ValueError):
    """Correlation spectrum violates trace, positivity or distinctness constraints."""
