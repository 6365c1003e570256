"""Exception types raised across the package."""


class WhitneyError(Exception):
    """Base class for all package errors."""


class InputError(WhitneyError, ValueError):
    """Malformed input: dimension mismatch, bad literal, out-of-range parameter."""


class DegenerateBodyError(WhitneyError):
    """Body has (numerically) empty interior."""


class DegenerateGridError(WhitneyError):
    """Grid too coarse for the requested computation."""


class PreconditionError(WhitneyError):
    """A documented precondition does not hold (e.g. convexity spot-check failed)."""


class LPError(WhitneyError):
    """Linear program reported infeasible or unbounded where that must not happen."""


class CertificateUnavailable(WhitneyError):
    """Dual weights could not be pruned to a valid certificate.

    The raw weights are attached as ``raw`` for inspection.
    """

    def __init__(self, message, raw=None):
        super().__init__(message)
        self.raw = raw


class VerificationFailed(WhitneyError):
    """No positive multipliers exist for the given point set.

    This does not prove non-optimality; the point set simply certifies nothing.
    """


class NotAWitness(WhitneyError):
    """Modulus of smoothness vanishes on the grid, so the ratio is undefined."""
