"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class AccuracyError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class DataError(ValueError):
    """Malformed input data (bad CSV row, non-finite sample, ...)."""


class PreconditionError(ValueError):
    """A documented operator precondition is violated."""


class GridMismatchError(ValueError):
    """Fields passed to a binary operation live on different grids."""


class NumericsError(RuntimeError):
    """Non-finite accumulation inside an operator evaluation."""


class BlowUpError(RuntimeError):
    """Time integration produced a non-finite state."""

    def __init__(self, t, message=None):
        self.t = t
        super().__init__(message or f"solution blew up at t={t:.6g}")


class DegenerateFitError(RuntimeError):
    """Too few usable data points for a rate fit."""
