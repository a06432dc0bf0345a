"""Exception hierarchy.

The CLI maps :class:`OutOfRegimeError` to exit code 3 and every other
:class:`PLRError` to exit code 2.
"""


class PLRError(Exception):
    """Base class for all errors raised by plrquad."""


class InvalidArgumentError(PLRError, ValueError):
    pass


class InvalidModulusError(InvalidArgumentError):
    """Modulus polynomial is zero or constant."""


class InvalidDepthError(InvalidArgumentError):
    """Scrambling depth smaller than the number of digits of the point set."""


class InsufficientReplicatesError(InvalidArgumentError):
    pass


class DimensionError(PLRError, ValueError):
    pass


class TooLargeError(PLRError):
    """An exhaustive computation would exceed its work guard."""


class UnsupportedWeightsError(PLRError, ValueError):
    """Weight sequence makes a required series or product diverge."""


class ConfigurationError(PLRError, ValueError):
    pass


class PlanError(ConfigurationError):
    pass


class OutOfRegimeError(PLRError, ValueError):
    """Parameters outside the range where the rate results apply."""
