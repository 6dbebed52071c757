"""Exception hierarchy shared across the package."""


class GpratesError(Exception):
    """Base class for all package errors."""


class DomainError(GpratesError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ZeroDensityError(GpratesError, ZeroDivisionError):
    """The density vanishes where a ratio or scaling function needs it."""


class DegenerateRateError(GpratesError, ValueError):
    """The second-order rate function is identically zero (|A| = 0)."""


class QuadratureError(GpratesError, RuntimeError):
    """Quadrature failed to reach the requested tolerance."""


class SweepError(GpratesError, RuntimeError):
    """Too many grid points of a threshold sweep failed."""


class UsageError(GpratesError, ValueError):
    """Malformed CLI input (family spec, grid spec, flag values)."""
