"""
Exceptions raised by the toral recurrence toolkit.
"""


class ToralError(Exception):
    """Base class for every error raised by the toolkit."""


class DimensionMismatchError(ToralError, ValueError):
    """A point, frame or ball does not live on the torus the map acts on."""


class UnsupportedOperationError(ToralError):
    """The operation is not defined for this kind of map or spectrum."""


class NumericalDegeneracyError(ToralError, ArithmeticError):
    """A tangent frame collapsed below the representable stretch factor."""


class UndefinedBoundsError(ToralError, ValueError):
    """Recurrence bounds need at least one positive Lyapunov exponent."""


class InsufficientSamplingError(ToralError):
    """Rejection sampling found too few members of the target set."""


class InsufficientDataError(ToralError):
    """Too few usable radii or points remain for a regression."""


class RationalInputError(ToralError, ValueError):
    """A continued fraction expansion terminated: the input is rational."""


class ConfigError(ToralError, ValueError):
    """An experiment parameter violates the precondition of the operation it feeds."""
