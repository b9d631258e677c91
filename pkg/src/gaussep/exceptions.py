"""Exception types raised across the package."""


class GaussepError(Exception):
    """Base class for all package-specific errors."""


class InvalidStateError(GaussepError, ValueError):
    """A Gaussian state violates a structural requirement (shape, symmetry,
    or the uncertainty bound on its covariance matrix)."""


class InvalidCovarianceError(GaussepError, ValueError):
    """A covariance matrix is unusable for the requested operation
    (non-positive determinant, impossible symplectic spectrum, ...)."""


class UnsupportedModeCountError(GaussepError, ValueError):
    """Operation is defined only for a specific number of modes."""


class ConditioningError(GaussepError, RuntimeError):
    """A linear system built from measurement settings is singular or
    near-singular.  The message names the parameter to change."""


class InsufficientShotsError(GaussepError, RuntimeError):
    """Too few measurement shots to produce the requested estimate."""


class SimonTypeMismatchError(GaussepError, RuntimeError):
    """Determinant inputs are not consistent with any valid covariance
    matrix of Simon normal form."""


class AmbiguousRootError(GaussepError, RuntimeError):
    """Two distinct solutions of the Simon-form determinant system are
    both physically valid; no disambiguation rule is applied."""
