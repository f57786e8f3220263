"""Exception hierarchy shared by all brwcrit modules."""


class BRWError(Exception):
    """Base class for every error raised by brwcrit."""


class ValidationError(BRWError, ValueError):
    """Invalid model parameters or arguments."""


class DomainError(ValidationError):
    """Argument outside the mathematical domain of a function."""


class WindowTooSmallError(ValidationError):
    """Lattice window does not contain the sources (or the walk envelope)."""


class StepSizeError(ValidationError):
    """Time step exceeds the integrator's stability bound."""


class NumericalFailure(BRWError, ArithmeticError):
    """An iterative method failed to converge."""


class InternalContradictionError(BRWError, RuntimeError):
    """A computed result contradicts a proven property of the model."""


class EstimationError(BRWError, ValueError):
    """Not enough usable data to form an estimate."""
