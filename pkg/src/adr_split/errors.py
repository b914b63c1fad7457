"""Exception hierarchy for the solver package."""

from __future__ import annotations


class AdrSplitError(Exception):
    """Base class for all package errors."""


class ExprSyntaxError(AdrSplitError):
    """Malformed expression source; carries the character position."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownIdentifierError(ExprSyntaxError):
    """Identifier that is neither a variable (x, y) nor a known function."""


class EvalDomainError(AdrSplitError):
    """Expression evaluation hit a mathematical singularity.

    Stores the offending point so the caller can report where the
    coefficient field blew up.
    """

    def __init__(self, message, point):
        super().__init__(f"{message} at point ({point[0]:.17g}, {point[1]:.17g})")
        self.point = point


class DegenerateFieldError(AdrSplitError):
    """Advection field norm fell below the configured threshold."""


class EmptyInflowError(AdrSplitError):
    """Inflow boundary set is empty; no curves can be seeded."""


class MaxArcLengthError(AdrSplitError):
    """Integral curve exceeded the arc-length cutoff (closed or trapped curve)."""


class SingularSystemError(AdrSplitError):
    """Zero pivot during direct elimination."""


class EmptyGridError(AdrSplitError):
    """Transfer grid carries no intersection records at all."""


class OutOfDomainError(AdrSplitError):
    """Point to sample lies outside the bounding box beyond tolerance."""


class NumericalError(AdrSplitError):
    """Non-finite values appeared during a run."""


class ConfigError(AdrSplitError):
    """Invalid or missing run configuration."""
