"""Exception types shared across the package."""


class Gl2DistError(Exception):
    """Base class for all package errors."""


class ValidationError(Gl2DistError, ValueError):
    """A precondition on an argument was violated."""


class NotSquarefree(ValidationError):
    pass


class NotInvertible(ValidationError):
    pass


class ModuliNotCoprime(ValidationError):
    pass


class NotCoprime(ValidationError):
    pass


class BadInterval(ValidationError):
    pass


class IndexOutOfRange(ValidationError):
    pass


class TableTooSmall(ValidationError):
    pass


class QuadratureNotConverged(Gl2DistError, ArithmeticError):
    """Adaptive quadrature could not reach the requested tolerance."""
