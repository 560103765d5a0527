"""Exception types shared across the package."""


class MomsolveError(Exception):
    """Base class for all library errors."""


class ZeroMatrixError(MomsolveError):
    """The matrix has no nonzero entries."""


class InconsistentSystemError(MomsolveError):
    """The right-hand side is not (numerically) in the range of A."""


class InvalidRankError(MomsolveError):
    """Requested rank exceeds min(m, n) or is < 1."""


class UnsupportedError(MomsolveError):
    """Format or scheme not supported by this operation."""


class MatrixMarketParseError(MomsolveError):
    """Malformed Matrix Market file."""


class InvalidBlockSizeError(MomsolveError):
    """Block size outside [1, m]."""


class ZeroSketchResidualError(MomsolveError):
    """S^T r is numerically zero; the sampled step is undefined."""


class StalledSamplingError(MomsolveError):
    """Rejection sampling hit its cap while the residual is still large."""


class DegenerateDirectionError(MomsolveError):
    """Gradient and momentum direction are numerically dependent."""


class BreakdownError(MomsolveError):
    """CG-type recursion broke down with a large residual."""


class AlreadySolvedError(MomsolveError):
    """x0 already equals the min-norm solution; RSE is undefined."""


class ExactConvergence(MomsolveError):
    """Sentinel raised when the final RSE is exactly zero."""
