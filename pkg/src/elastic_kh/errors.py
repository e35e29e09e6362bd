"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the set where an operation is defined."""


class SingularDenominatorError(ArithmeticError):
    """A mode denominator vanishes (or nearly so) on one side of the front."""

    def __init__(self, message, side=None):
        super().__init__(message)
        self.side = side


class NumericalFailure(RuntimeError):
    """An iterative or time-stepping procedure failed to produce a usable result."""
