"""Exception hierarchy shared by every module."""


class FairShareError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(FairShareError, ValueError):
    """A parameter lies outside the mathematical domain of an operation."""


class MalformedValuationError(FairShareError, ValueError):
    """A valuation violates its invariants (non-monotone, missing entries, bad weights)."""


class InstanceFormatError(FairShareError, ValueError):
    """An instance or family literal could not be parsed."""


class CapabilityError(FairShareError, RuntimeError):
    """The request is well posed but exceeds an enumeration or search budget."""
