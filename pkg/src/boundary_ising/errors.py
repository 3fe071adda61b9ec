"""Exception types shared across the package."""


class BoundaryIsingError(Exception):
    """Base class for all package errors."""


class DomainError(BoundaryIsingError, ValueError):
    """Argument outside the mathematical domain of a function."""


class RangeError(BoundaryIsingError, ValueError):
    """Evaluation point outside the range covered by a tabulated solution."""


class SolverError(BoundaryIsingError, RuntimeError):
    """ODE integration failed; ``where`` holds the abscissa of the failure."""

    def __init__(self, message, where=None):
        super().__init__(message if where is None else f"{message} (at {where:.6g})")
        self.where = where


class QuadratureError(BoundaryIsingError, RuntimeError):
    """Quadrature did not reach the requested accuracy."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
