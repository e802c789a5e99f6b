"""Exception types shared across the package."""


class LandauSpecError(Exception):
    """Base class for all package errors."""


class ConfigError(LandauSpecError):
    """Bad or inconsistent experiment configuration."""


class DegenerateField(LandauSpecError):
    """Magnetic matrix is (numerically) singular: the full-rank assumption fails."""


class NotQuantized(LandauSpecError):
    """Total flux is not an integer multiple of 2*pi within tolerance."""


class NonPositiveFlux(LandauSpecError):
    """Quantized flux integer is <= 0."""


class FluxAliased(LandauSpecError):
    """p * max plaquette flux >= pi: the grid is too coarse for this tensor power."""


class NonUnitaryPhases(LandauSpecError):
    """A gauge/site phase deviates from unit modulus beyond tolerance."""


class WindowBoundaryHit(LandauSpecError):
    """An eigenvalue lies within tolerance of a window endpoint; shift the window."""


class NoConvergence(LandauSpecError):
    """Iterative eigensolver failed to converge; carries diagnostics in args."""


class ShiftSingular(LandauSpecError):
    """A shifted factorization hit a near-zero pivot even after retry."""


class EnergyCapExceeded(LandauSpecError):
    """An eigenvalue lies above the truncation cap of the band set."""


class InsufficientPoints(LandauSpecError):
    """Too few usable points for a least-squares rate fit."""


class InsufficientRange(LandauSpecError):
    """Too few distance bins survive the noise floor for a decay fit."""


class EmptyWindow(LandauSpecError):
    """No eigenpairs available in the requested window."""


class EmptyPrediction(LandauSpecError):
    """Counting prediction is zero while the observed count is not."""


class WindowBandMismatch(LandauSpecError):
    """Eigenvalue count in the window disagrees with the model band prediction."""
