"""Field configurations on the unit flat torus and the round sphere.

The torus is [0,1)^2 with the flat metric; the field is
b(x, y) = 2 pi m (1 + eps f(x, y)) with f a named zero-mean profile, so the
total flux is exactly 2 pi m.  Quadrature on periodic uniform grids is the
composite trapezoid rule, which for smooth periodic integrands is just the
grid mean (spectrally accurate).

The sphere configuration is analytic-only: it feeds the closed-form level
oracle, no discretization.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, NonPositiveFlux, NotQuantized
from .model import FieldSample

TWO_PI = 2.0 * np.pi

#: named zero-mean modulation profiles f(x, y)
PROFILES = {
    "constant": lambda x, y: np.zeros_like(np.asarray(x, dtype=float) + np.asarray(y, dtype=float)),
    "cos_x": lambda x, y: np.cos(TWO_PI * np.asarray(x, dtype=float)) + 0.0 * np.asarray(y, dtype=float),
    "cos_x_cos_y": lambda x, y: np.cos(TWO_PI * np.asarray(x, dtype=float)) * np.cos(TWO_PI * np.asarray(y, dtype=float)),
}

POTENTIAL_PRESETS = ("zero", "renormalized", "custom")


@dataclass(frozen=True)
class TorusConfig:
    """Flat-torus field b = 2 pi m (1 + eps f) and a potential preset.

    flux_m == 0 is allowed as the degenerate zero-field limit used by
    lattice consistency tests; field-sample constructors reject it.
    """

    flux_m: int
    epsilon: float = 0.0
    profile: str = "constant"
    potential: str = "zero"
    potential_values: Optional[np.ndarray] = None

    def __post_init__(self):
        if int(self.flux_m) != self.flux_m or self.flux_m < 0:
            raise ConfigError(f"flux_m must be a nonnegative integer, got {self.flux_m}")
        object.__setattr__(self, "flux_m", int(self.flux_m))
        if not (0.0 <= self.epsilon < 1.0):
            raise ConfigError(f"epsilon must lie in [0, 1), got {self.epsilon}")
        if self.profile not in PROFILES:
            raise ConfigError(f"unknown profile {self.profile!r}; choose from {sorted(PROFILES)}")
        if self.potential not in POTENTIAL_PRESETS:
            raise ConfigError(
                f"unknown potential preset {self.potential!r}; choose from {POTENTIAL_PRESETS}"
            )
        if self.potential == "custom":
            v = np.asarray(self.potential_values, dtype=float)
            if v.ndim != 2 or v.shape[0] != v.shape[1]:
                raise ConfigError("custom potential needs a square sample grid")
            object.__setattr__(self, "potential_values", v)
        elif self.potential_values is not None:
            raise ConfigError("potential_values only valid with potential='custom'")

    def b(self, x, y):
        """Field strength b(x, y); broadcasts like numpy."""
        f = PROFILES[self.profile](x, y)
        return TWO_PI * self.flux_m * (1.0 + self.epsilon * f)

    def b0(self) -> float:
        """Lower bound of b over the torus (exact for the named profiles)."""
        if self.profile == "constant":
            return TWO_PI * self.flux_m
        return TWO_PI * self.flux_m * (1.0 - self.epsilon)

    def V(self, x, y, grid_n: Optional[int] = None):
        """Potential samples for the chosen preset."""
        if self.potential == "zero":
            return np.zeros_like(np.asarray(x, dtype=float) + np.asarray(y, dtype=float))
        if self.potential == "renormalized":
            return -self.b(x, y)
        # custom: exact-node lookup on the stored grid
        v = self.potential_values
        n = v.shape[0]
        i = np.round(np.asarray(x, dtype=float) * n).astype(int) % n
        j = np.round(np.asarray(y, dtype=float) * n).astype(int) % n
        return v[i, j]


@dataclass(frozen=True)
class SphereConfig:
    """Round two-sphere of squared radius R^2 (R^2 = 1/(4 pi) normalizes the
    ground level to 2 pi)."""

    R_squared: float

    def __post_init__(self):
        if not self.R_squared > 0:
            raise ConfigError("R_squared must be positive")

    @property
    def a1(self) -> float:
        """The single frequency 1 / (2 R^2), constant over the sphere."""
        return 1.0 / (2.0 * self.R_squared)


def torus_grid(n: int):
    """Uniform periodic grid nodes x_i = i/n as a meshgrid pair (indexing 'ij')."""
    t = np.arange(n) / n
    return np.meshgrid(t, t, indexing="ij")


def quantization_check(b_grid: np.ndarray, tol: float = 1e-8) -> int:
    """Integer m with integral(b) = 2 pi m, or an error.

    b_grid holds samples of b on a uniform periodic grid; the trapezoid rule
    on such a grid is the plain mean.  Raises NotQuantized when no integer
    lies within ``tol``, NonPositiveFlux when m <= 0.
    """
    b_grid = np.asarray(b_grid, dtype=float)
    total = float(b_grid.mean())
    m = int(np.round(total / TWO_PI))
    if abs(total - TWO_PI * m) > tol:
        raise NotQuantized(
            f"flux integral {total:.12e} is not within {tol:g} of an integer multiple of 2 pi"
        )
    if m <= 0:
        raise NonPositiveFlux(f"quantized flux m = {m} must be positive")
    return m


def torus_liouville_measure(
    config: TorusConfig,
    predicate: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None,
    resolution: int = 256,
) -> float:
    """integral over {predicate} of b dx dy by periodic trapezoid quadrature.

    ``predicate(x, y)`` returns a boolean array; None means the whole torus,
    for which the result is exactly the total flux 2 pi m.
    """
    X, Y = torus_grid(resolution)
    w = config.b(X, Y)
    if predicate is not None:
        w = np.where(predicate(X, Y), w, 0.0)
    return float(w.mean())


def sphere_liouville_measure(
    config: SphereConfig,
    predicate: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None,
    resolution: int = 512,
) -> float:
    """integral over {predicate} of (1/2) sin(theta) dtheta dphi.

    The full-sphere value is 2 pi.  Theta uses an open midpoint grid (the
    integrand vanishes at the poles), phi a periodic uniform grid.
    """
    theta = (np.arange(resolution) + 0.5) * (np.pi / resolution)
    phi = np.arange(2 * resolution) * (TWO_PI / (2 * resolution))
    T, P = np.meshgrid(theta, phi, indexing="ij")
    w = 0.5 * np.sin(T)
    if predicate is not None:
        w = np.where(predicate(T, P), w, 0.0)
    return float(w.sum() * (np.pi / resolution) * (TWO_PI / (2 * resolution)))


def torus_field_samples(config: TorusConfig, resolution: int = 64):
    """FieldSamples of the torus field on a uniform grid (row-major order).

    B at (x, y) is [[0, b], [-b, 0]]; the potential eigenvalue list is the
    single scalar V(x, y).
    """
    if config.flux_m == 0:
        raise ConfigError("field samples need flux_m >= 1 (zero field is degenerate)")
    X, Y = torus_grid(resolution)
    b = config.b(X, Y)
    V = config.V(X, Y)
    out = []
    for i in range(resolution):
        for j in range(resolution):
            bij = b[i, j]
            out.append(
                FieldSample(
                    B_matrix=np.array([[0.0, bij], [-bij, 0.0]]),
                    V_eigs=(float(V[i, j]),),
                )
            )
    return out


def sphere_field_sample(config: SphereConfig) -> FieldSample:
    """The (constant) field sample of the sphere: a_1 = 1/(2 R^2), V = 0."""
    b = config.a1
    return FieldSample(B_matrix=np.array([[0.0, b], [-b, 0.0]]), V_eigs=(0.0,))
