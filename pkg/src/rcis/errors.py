"""Exception hierarchy shared by every rcis module."""


class RcisError(Exception):
    """Base class for all errors raised by this package."""


# numerics / solvers
class NumericFailure(RcisError):
    """A solver cycled, stalled or returned a point violating its own constraints."""


class EmptySet(RcisError, ValueError):
    pass


class Unbounded(RcisError, ValueError):
    pass


class DimensionMismatch(RcisError, ValueError):
    pass


class DimensionTooHigh(RcisError, ValueError):
    pass


class BadCenter(RcisError, ValueError):
    """The point handed to the interiority LP is not strictly inside the outer set."""


class BlowupBudget(RcisError):
    """Fourier-Motzkin elimination produced more rows than the configured cap."""


# problem ingestion
class ParseError(RcisError, ValueError):
    pass


class UnboundedSet(RcisError, ValueError):
    pass


class SeedOutsideSafeSet(RcisError, ValueError):
    pass


class NoStationaryPoint(RcisError):
    pass


# algorithms / analysis
class SeedNotInvariant(RcisError, ValueError):
    pass


class DegenerateIterate(RcisError):
    pass


class NoCertificateFound(RcisError):
    pass


class PreconditionError(RcisError, ValueError):
    pass


class DomainError(RcisError, ValueError):
    pass


class NonPositiveDistance(RcisError, ValueError):
    pass


# scalar oracle
class NotInvariantSeed(RcisError, ValueError):
    pass


class WrongCase(RcisError, ValueError):
    pass
