"""Exception types shared across the package."""


class RecordAgesError(Exception):
    """Base class for package errors."""


class DivergenceError(RecordAgesError, ArithmeticError):
    """The requested quantity is infinite (e.g. the mean straddling interval)."""


class ResourceLimitError(RecordAgesError):
    """A size parameter exceeds its configured ceiling."""


class QuadratureError(RecordAgesError, ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""
