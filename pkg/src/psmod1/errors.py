"""Exception types shared across the toolkit."""


class PsToolError(Exception):
    """Base class for all toolkit errors."""


class PrecisionExhausted(PsToolError):
    """A certified computation could not be resolved at maximum precision.

    Typically signals that n^theta sits on (or absurdly close to) an integer
    boundary while theta is only known as a float; rerun with an exact
    rational exponent.
    """


class InvalidDelta(PsToolError):
    """Delta outside (0, 1/4), where the window indicator is ill-defined."""


class GammaOutOfRange(PsToolError):
    """gamma outside the range required by the requested operation."""


class RegimeViolation(PsToolError):
    """Inputs outside the regime where an identity or bound is asserted."""


class InvalidLambda(PsToolError):
    """Second-derivative scale lambda must be positive."""


class InvalidConfig(PsToolError):
    """Malformed run configuration (bad spec string, bad flag combination)."""
