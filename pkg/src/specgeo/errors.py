"""Exception hierarchy shared by all modules."""


class SpecGeoError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(SpecGeoError, ValueError):
    """Malformed, non-Hermitian or non-positive input data."""


class DimensionError(InvalidInputError):
    pass


class SingularResolventError(SpecGeoError, ArithmeticError):
    """``zI - A`` is (numerically) singular at the requested point."""


class PoleOnCircleError(SpecGeoError, ArithmeticError):
    """A pole lies on (or within tolerance of) the unit circle."""


class SingularFeedthroughError(SpecGeoError, ArithmeticError):
    """The feedthrough matrix ``D`` is not invertible."""


class UnstableSystemError(SpecGeoError, ArithmeticError):
    pass


class BoundaryRootError(SpecGeoError, ArithmeticError):
    """A spectral zero or pole sits on the unit circle.

    ``roots`` holds the offending roots so that callers can report them.
    """

    def __init__(self, message, roots=()):
        super().__init__(message)
        self.roots = tuple(roots)


class UnsupportedRankError(SpecGeoError, ArithmeticError):
    """The spectrum is rank deficient; only full normal rank is supported."""


class ConvergenceError(SpecGeoError, ArithmeticError):
    pass


class NotPositiveDefiniteError(InvalidInputError):
    pass


class GridMismatchError(InvalidInputError):
    pass


class DegenerateFrameError(SpecGeoError, ArithmeticError):
    """Autocorrelation sequence is not positive definite (silent frame)."""


class NotNormalizedError(InvalidInputError):
    pass
