"""Exception types shared across the package."""


class PretimeError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(PretimeError, ValueError):
    """An input lies outside an operation's mathematical domain."""


class ConstructionError(PretimeError, ValueError):
    """Invalid parameters passed to a constructor or factory."""


class OverflowGuardError(PretimeError, OverflowError):
    """A quantity would exceed the representable floating range.

    Raised instead of silently producing ``inf``: the structurally
    unbounded quantities (reciprocal-slope gains, continuity constants
    for tiny branch thresholds) reject arguments past the guard.
    """


class SingularGainError(PretimeError):
    """The regulator slope vanished where its reciprocal is needed."""


class GainInversionError(PretimeError):
    """The plant input gain is too close to zero to invert."""


class TooFewSamplesError(PretimeError, ValueError):
    """A trajectory has too few samples for the requested estimate."""


class StepSizeError(PretimeError):
    """The integration step is too coarse to resolve the dynamics."""


class NonFiniteStateError(PretimeError):
    """A dynamics evaluation produced a non-finite value."""


class ConfigError(PretimeError, ValueError):
    """A run configuration is malformed or references unknown names."""
