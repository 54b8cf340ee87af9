"""Exception hierarchy.

Validation problems subclass ``ValidationError`` (itself a ``ValueError``) so
the CLI can map them to a single exit code.
"""


class TrancheError(Exception):
    """Base class for all package errors."""


class ValidationError(TrancheError, ValueError):
    """Invalid model input."""


class EmptyPortfolio(ValidationError):
    pass


class LoadingNormTooLarge(ValidationError):
    pass


class FractionSumMismatch(ValidationError):
    pass


class FieldOutOfRange(ValidationError):
    pass


class UnknownPreset(ValidationError):
    pass


class NonMonotoneDetachments(ValidationError):
    pass


class DomainError(TrancheError, ValueError):
    """Argument outside the mathematical domain of a function."""


class OrderTooLarge(TrancheError, ValueError):
    pass


class OrderOutOfRange(TrancheError, ValueError):
    pass


class GridTooLarge(TrancheError, ValueError):
    pass


class DegenerateVariance(TrancheError, ValueError):
    pass


class PortfolioTooLarge(TrancheError, ValueError):
    pass
