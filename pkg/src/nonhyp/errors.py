"""Exception hierarchy shared by all nonhyp modules."""


class NonhypError(Exception):
    """Base class for all library errors."""


class ConfigError(NonhypError):
    """Invalid or inconsistent run configuration."""


class NotCodable(NonhypError):
    """A symbol stream cannot be parsed as a concatenation of codewords."""


class WindowTooSmall(NonhypError):
    """Decoding-count search exceeded its position window before resolving."""


class WindowTooShort(NonhypError):
    """A symbol window is too short for the requested address walk."""


class SizeOverflow(NonhypError):
    """A derived code would exceed the configured cardinality cap."""


class NotHyperbolic(NonhypError):
    """Operation requires a hyperbolic matrix."""


class Inconclusive(NonhypError):
    """An exponent estimate did not stabilize across doubled horizons."""


class SearchExhausted(NonhypError):
    """A word search hit its depth cap without reaching its target."""

    def __init__(self, message, depth_cap=None):
        super().__init__(message)
        self.depth_cap = depth_cap


class CertificateViolated(NonhypError):
    """A contraction-certificate clause failed; carries the witness."""

    def __init__(self, clause, witness, message=None):
        super().__init__(message or f"clause ({clause}) violated: {witness}")
        self.clause = clause
        self.witness = witness


class NoConvergence(NonhypError):
    """Backward iteration missed its predicted contraction budget."""


class HorizonCapExceeded(NonhypError):
    """Distortion-horizon search passed its cap without success."""


class HypothesisFails(NonhypError):
    """A base orbit violates the derivative sandwich it was assumed to satisfy."""


class SkeletonTooSmall(NonhypError):
    """Fewer than two admissible skeleton entries were found."""


class CifsRejected(NonhypError):
    """The assembled word collection failed certificate verification."""

    def __init__(self, clause, message=None):
        super().__init__(message or f"initial word system rejected at clause {clause}")
        self.clause = clause


class CardinalityOutOfRange(NonhypError):
    """log(cardinality) fell outside the entropy sandwich."""


class TailTooLong(NonhypError):
    """A constructed tail violates its length bound; carries the tuple."""

    def __init__(self, tup, length, bound):
        super().__init__(f"tail of length {length} exceeds bound {bound:.3f} for tuple {tup}")
        self.tup = tup
        self.length = length
        self.bound = bound
