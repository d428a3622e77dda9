"""Exception types shared across the package."""


class PevError(Exception):
    """Base class for all library errors."""


class MalformedExpression(PevError):
    """Payload violates the canonical-form rules of its instance."""


class DepthMismatch(PevError):
    """A nesting-level operation was applied at an impossible depth."""


class CarrierMismatch(PevError):
    """An atom does not belong to the algebra's carrier, or the algebra
    does not match the expression's instance."""


class PartialFunction(PevError):
    """A supplied atom function failed on an atom it was applied to."""


class EnumerationLimitExceeded(PevError):
    """An enumeration would exceed the configured size limit."""


class UnsupportedInstance(PevError):
    """The requested operation is not available for this monad instance."""


class NotComposable(PevError):
    """Witness boundaries do not meet, so no composite exists."""


class InvalidWitness(PevError):
    """A witness failed its boundary equations."""


class FillerNotFound(PevError):
    """Internal invariant violation: a filler that must exist could not be
    built.  Seeing this error means a bug, not bad input."""


class IndexOutOfRange(PevError):
    """Face or degeneracy index outside the valid range for the level."""


class DimensionMismatch(PevError):
    """Points of different dimensions were mixed."""


class PreconditionViolated(PevError):
    """An operation's input equations do not hold."""


class ConditioningUndefined(PevError):
    """Conditioning on an event of probability zero."""


class InvalidDilation(PevError):
    """A kernel does not fix the barycenters on the base support."""


class DomainMismatch(PevError):
    """Kernel domains or bases do not line up for composition."""
