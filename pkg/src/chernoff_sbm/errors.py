"""Exception hierarchy shared across the package."""


class ChernoffSbmError(Exception):
    """Base class for all package-specific errors."""


class LengthMismatch(ChernoffSbmError, ValueError):
    """Two vectors that must have equal length do not."""


class OutOfRange(ChernoffSbmError, ValueError):
    """A probability or parameter lies outside its admissible open interval."""


class AlphaOutOfRange(ChernoffSbmError, ValueError):
    """The tilting parameter alpha is outside (0, 1)."""


class DegeneratePair(ChernoffSbmError, ValueError):
    """The two hypotheses coincide everywhere; no interior maximizer exists."""


class TooLarge(ChernoffSbmError, ValueError):
    """Problem size exceeds the brute-force enumeration limit."""


class GridTooLarge(ChernoffSbmError, ValueError):
    """The grouped count grid exceeds the exact-evaluation cell budget."""


class IndistinguishableCommunities(ChernoffSbmError, ValueError):
    """Two distinct communities have identical connectivity rows."""


class ConvergenceFailure(ChernoffSbmError, RuntimeError):
    """An iterative solver did not reach its residual tolerance."""


class DegenerateSplit(ChernoffSbmError, RuntimeError):
    """Random half-splits kept losing a community after the retry budget."""
