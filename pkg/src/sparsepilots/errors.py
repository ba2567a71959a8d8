"""Exception types shared across the package."""


class SparsePilotsError(Exception):
    """Base class for all errors raised by this package."""


class EmptyPattern(SparsePilotsError, ValueError):
    """A pilot pattern must contain at least one index."""


class IndexOutOfRange(SparsePilotsError, ValueError):
    """A pilot or delay index falls outside [0, n)."""


class DimensionMismatch(SparsePilotsError, ValueError):
    """Vector or matrix dimensions do not agree."""


class RankDeficient(SparsePilotsError, ValueError):
    """Support-restricted columns are numerically linearly dependent."""


class InvalidCount(SparsePilotsError, ValueError):
    """A requested count (pilots, taps) is outside its valid range."""


class NotDivisible(SparsePilotsError, ValueError):
    """Equidistant allocation requires the pilot count to divide n."""


class NoDifferenceSet(SparsePilotsError, LookupError):
    """No cyclic difference set is known for the requested pair."""


class DelayCollision(SparsePilotsError, ValueError):
    """Two profile delays round to the same sample index."""


class ZeroPilotSymbol(SparsePilotsError, ValueError):
    """Pilot symbols must be nonzero to divide by them."""


class ParseError(SparsePilotsError, ValueError):
    """A pattern or profile file could not be parsed."""


class ConfigError(SparsePilotsError, ValueError):
    """A simulation configuration violates one or more invariants."""
