"""Exception types shared by every module."""


class MarkedLengthError(Exception):
    """Base class for library errors."""


class GroupInputError(MarkedLengthError, ValueError):
    """Malformed input: unknown symbol, group mismatch, bad parameter."""


class ResourceBudgetError(MarkedLengthError):
    """An enumeration or search would exceed the configured budget."""


class PrecisionError(MarkedLengthError):
    """A truncated series cannot guarantee the requested accuracy."""


class DivergenceRiskError(PrecisionError):
    """The Green series radius r is at or beyond the estimated critical value."""


class DegenerateError(MarkedLengthError):
    """An estimator has nothing to work with (empty shells, zero return mass)."""


class UnsupportedError(MarkedLengthError):
    """Operation not available for this kind of metric or group."""


class WindowExhaustedError(MarkedLengthError):
    """A projection minimizer sits on the edge of the axis window."""
