"""Checks at the level of the limit theorems: spectral distance to the band
set, power-law rate fits across tensor powers, counting-law comparisons, and
the exact sphere oracle."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    ConfigError,
    EmptyPrediction,
    EnergyCapExceeded,
    InsufficientPoints,
)
from .geometry import (
    SphereConfig,
    TorusConfig,
    sphere_field_sample,
    torus_field_samples,
    torus_grid,
)
from .model import SigmaSet, sigma_bands

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ClusterReport:
    """Per-eigenvalue distances to the band set for one tensor power."""

    p: Optional[int]
    window: tuple
    per_eig_dist: tuple  # ((lambda, dist), ...)
    max_dist: float

    @property
    def witness(self) -> Optional[float]:
        """max_dist * p^{1/4}, the single-constant clustering witness."""
        if self.p is None:
            return None
        return self.max_dist * self.p ** 0.25


def distance_to_sigma(eigs: Sequence[float], sigma: SigmaSet, p: Optional[int] = None) -> ClusterReport:
    """Euclidean distance of each eigenvalue to the union of bands.

    Zero inside a band.  Raises EnergyCapExceeded for eigenvalues above the
    truncation cap (the band set is unreliable there).
    """
    eigs = np.asarray(eigs, dtype=float)
    if eigs.size and eigs.max() > sigma.energy_cap:
        raise EnergyCapExceeded(
            f"eigenvalue {eigs.max():.6g} above energy cap {sigma.energy_cap:.6g}"
        )
    pairs = tuple((float(e), float(sigma.distance(e))) for e in eigs)
    max_dist = max((d for _, d in pairs), default=0.0)
    window = (float(eigs.min()), float(eigs.max())) if eigs.size else (np.nan, np.nan)
    return ClusterReport(p=p, window=window, per_eig_dist=pairs, max_dist=max_dist)


def rate_fit(points: Sequence[tuple]) -> tuple:
    """(slope, intercept, r_squared) of log(max_dist) against log(p).

    Points with max_dist < 1e-12 are excluded as exact hits; fewer than 3
    survivors raise InsufficientPoints.
    """
    kept = [(p, d) for p, d in points if d >= 1e-12]
    if len(kept) < 3:
        raise InsufficientPoints(
            f"rate fit needs >= 3 points with max_dist >= 1e-12, got {len(kept)}"
        )
    x = np.log([p for p, _ in kept])
    y = np.log([d for _, d in kept])
    slope, intercept = np.polyfit(x, y, 1)
    yhat = slope * x + intercept
    ss_res = float(np.sum((y - yhat) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), float(r2)


def sigma_for_torus(
    config: TorusConfig,
    k_max: int = 8,
    energy_cap: Optional[float] = None,
    resolution: int = 64,
) -> SigmaSet:
    """Band set of the torus field, sampled on a uniform grid.

    energy_cap defaults to 5 * Lambda_0 computed from the sampled ground
    level (with a floor of 5 * 2 pi m for the renormalized preset, whose
    ground level is 0).
    """
    samples = torus_field_samples(config, resolution)
    if energy_cap is None:
        lam0 = min(
            sum(s.frequencies()) + min(s.V_eigs) for s in samples
        )
        base = TWO_PI * max(config.flux_m, 1)
        energy_cap = 5.0 * max(lam0, base)
    return sigma_bands(samples, k_max=k_max, energy_cap=float(energy_cap))


def band_window(sigma: SigmaSet, band_index: int = 0) -> tuple:
    """Named window around the `band_index`-th merged component.

    Midpoints of the adjacent gaps; the lower edge of component 0 falls back
    to half the ground level (or a quarter-gap below it when the component
    touches 0, as in the renormalized preset).
    """
    comps = sigma.components
    if not 0 <= band_index < len(comps):
        raise ConfigError(f"band index {band_index} out of range ({len(comps)} components)")
    alpha, beta = comps[band_index]
    if band_index + 1 < len(comps):
        hi = 0.5 * (beta + comps[band_index + 1][0])
    else:
        hi = min(sigma.energy_cap, beta + 1.0)
    if band_index > 0:
        lo = 0.5 * (comps[band_index - 1][1] + alpha)
    elif alpha > 0:
        lo = 0.5 * alpha
    else:
        gap_above = (comps[1][0] - beta) if len(comps) > 1 else 1.0
        lo = alpha - 0.25 * gap_above
    return float(lo), float(hi)


def demailly_compare(
    config: TorusConfig,
    p: int,
    window: tuple,
    count: int,
    sigma: Optional[SigmaSet] = None,
    resolution: int = 256,
) -> tuple:
    """(predicted, relative_error) for the counting law in `window`.

    predicted = (p / 2 pi) * sum over levels of the Liouville measure of
    {x : Lambda_k(x) in window}; on the flat torus the Liouville density is
    b(x, y) itself.  Window endpoints must lie outside every band.  Raises
    EmptyPrediction when the prediction is 0 but the observed count is not.
    """
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise ConfigError("window must satisfy lo < hi")
    if sigma is None:
        sigma = sigma_for_torus(config, energy_cap=max(4.0 * hi, 10.0 * TWO_PI * max(config.flux_m, 1)))
    for edge in (lo, hi):
        if edge > sigma.energy_cap:
            raise ConfigError(
                f"window endpoint {edge:.6g} above the band-set energy cap "
                f"{sigma.energy_cap:.6g}"
            )
        if not sigma.in_gap(edge):
            raise ConfigError(
                f"window endpoint {edge:.6g} lies inside a band of the band set"
            )
    X, Y = torus_grid(resolution)
    b = np.asarray(config.b(X, Y), dtype=float)
    V = np.asarray(config.V(X, Y), dtype=float)
    measure = 0.0
    k = 0
    while True:
        lam = (2 * k + 1) * b + V
        if lam.min() > hi:
            break
        mask = (lam > lo) & (lam < hi)
        measure += float(np.where(mask, b, 0.0).mean())
        k += 1
        if k > 10_000:  # pragma: no cover - defensive
            raise RuntimeError("level enumeration did not terminate")
    predicted = (p / TWO_PI) * measure
    if predicted == 0.0:
        if count > 0:
            raise EmptyPrediction(
                f"counting prediction is 0 in ({lo:.6g}, {hi:.6g}) but count = {count}"
            )
        return 0.0, 0.0
    return float(predicted), float(abs(count - predicted) / predicted)


def sphere_exact(config: SphereConfig, p: int, k_max: int) -> list:
    """Closed-form levels of the sphere at tensor power p.

    Rows (k, nu_{p,k}, mult_{p,k}, dist), with

        nu_{p,k}  = (2k+1) / (2 R^2) + k (k+1) / (R^2 p),
        mult_{p,k} = p + 2k + 1,

    and dist = k (k+1) / (R^2 p), the offset of nu_{p,k} from its parent
    model level (2k+1)/(2 R^2); it vanishes identically at k = 0.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    R2 = config.R_squared
    rows = []
    for k in range(k_max + 1):
        nu = (2 * k + 1) / (2.0 * R2) + k * (k + 1) / (R2 * p)
        mult = p + 2 * k + 1
        dist = k * (k + 1) / (R2 * p)
        rows.append((k, float(nu), int(mult), float(dist)))
    return rows


def sphere_sigma(config: SphereConfig, k_max: int = 8) -> SigmaSet:
    """Band set of the sphere: zero-width bands at (2k+1) a_1."""
    sample = sphere_field_sample(config)
    cap = (2 * k_max + 1) * config.a1 + config.a1
    return sigma_bands([sample], k_max=k_max, energy_cap=cap)
