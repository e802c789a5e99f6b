"""Exact computations for the constant-coefficient model operator.

At a fixed point the magnetic matrix B (real, skew-symmetric, invertible,
2n x 2n) has eigenvalues +/- i a_j with frequencies a_1 <= ... <= a_n > 0.
The model operator's spectrum consists of the levels

    Lambda_{k, mu} = sum_j (2 k_j + 1) a_j + V_mu,

each infinitely degenerate.  Collecting the ranges of Lambda_{k, mu}(x) over
a family of field samples gives the band set Sigma; its complement components
are the spectral gaps.  The lowest-level projector has the Gaussian
reproducing kernel `bergman_kernel`; higher levels have Laguerre-polynomial
kernels (`landau_level_kernel`).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import eval_laguerre

from .errors import DegenerateField

# Default floor under which the smallest frequency is treated as zero
# (exact-zero detection is numerically meaningless).
B0_FLOOR = 1e-8

SKEW_TOL = 1e-12


def _as_matrix(B) -> np.ndarray:
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1] or B.shape[0] % 2 != 0:
        raise ValueError(f"B must be a 2n x 2n matrix, got shape {B.shape}")
    return B


def frequencies(B_matrix, b0_floor: float = B0_FLOOR) -> np.ndarray:
    """Positive frequencies a_1 <= ... <= a_n of a skew-symmetric matrix.

    The spectrum of a real skew-symmetric invertible B is {+/- i a_j}; the
    a_j are returned sorted ascending.  Computed from the imaginary parts of
    the eigenvalues (the test-side oracle uses singular-value pairing
    instead, which is an independent route to the same numbers).

    Raises DegenerateField if the smallest singular value is below
    ``b0_floor``.
    """
    B = _as_matrix(B_matrix)
    scale = np.abs(B).max()
    if scale == 0.0:
        raise DegenerateField("zero magnetic matrix")
    if np.abs(B + B.T).max() > SKEW_TOL * scale:
        raise ValueError("B is not skew-symmetric to tolerance")
    smin = np.linalg.svd(B, compute_uv=False).min()
    if smin < b0_floor:
        raise DegenerateField(
            f"smallest singular value {smin:.3e} below floor {b0_floor:.3e}"
        )
    ev = np.linalg.eigvals(B)
    pos = np.sort(ev.imag[ev.imag > 0])
    n = B.shape[0] // 2
    if pos.size != n:  # pragma: no cover - guarded by the checks above
        raise DegenerateField("eigenvalues did not split into +/- i a_j pairs")
    return pos


@dataclass(frozen=True)
class FieldSample:
    """Magnetic matrix and potential eigenvalues at one manifold point.

    B_matrix : real skew-symmetric 2n x 2n matrix (inverse length squared).
    V_eigs   : sorted tuple of r real potential eigenvalues (energy units).
    """

    B_matrix: np.ndarray
    V_eigs: tuple
    b0_floor: float = B0_FLOOR

    def __post_init__(self):
        B = _as_matrix(self.B_matrix)
        object.__setattr__(self, "B_matrix", B)
        V = tuple(float(v) for v in self.V_eigs)
        if any(V[i] > V[i + 1] for i in range(len(V) - 1)):
            raise ValueError("V_eigs must be sorted ascending")
        if not V:
            raise ValueError("V_eigs must be nonempty")
        object.__setattr__(self, "V_eigs", V)
        # Validates skewness and invertibility as a side effect.
        frequencies(B, self.b0_floor)

    @property
    def n(self) -> int:
        return self.B_matrix.shape[0] // 2

    @property
    def r(self) -> int:
        return len(self.V_eigs)

    def frequencies(self) -> np.ndarray:
        return frequencies(self.B_matrix, self.b0_floor)


def landau_levels(a: Sequence[float], V_eigs: Sequence[float], k_max: int):
    """All levels Lambda_{k, mu} with |k|_inf <= k_max, sorted ascending.

    Returns a list of (k_tuple, mu, value) with
    value = sum_j (2 k_j + 1) a_j + V_mu.  The first entry equals
    Lambda_0 = sum_j a_j + min_mu V_mu.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or a.size == 0 or np.any(a <= 0):
        raise ValueError("frequencies must be positive")
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    V = [float(v) for v in V_eigs]
    base = float(a.sum())
    out = []
    for k in itertools.product(range(k_max + 1), repeat=a.size):
        lam_k = base + 2.0 * float(np.dot(k, a))
        for mu, v in enumerate(V):
            out.append((k, mu, lam_k + v))
    out.sort(key=lambda t: (t[2], t[0], t[1]))
    return out


@dataclass(frozen=True)
class Band:
    """One (k, mu) band [alpha, beta] of the band set."""

    k_abs: int
    mu: int
    alpha: float
    beta: float
    k: tuple = ()

    def __post_init__(self):
        if self.alpha > self.beta:
            raise ValueError("band must satisfy alpha <= beta")

    def contains(self, x: float) -> bool:
        return self.alpha <= x <= self.beta

    def distance(self, x: float) -> float:
        if x < self.alpha:
            return self.alpha - x
        if x > self.beta:
            return x - self.beta
        return 0.0


@dataclass(frozen=True)
class SigmaSet:
    """Band set: raw (k, mu) bands plus merged closed components and gaps.

    bands      : individual (k, mu) bands kept for counting bookkeeping.
    components : maximal closed intervals obtained by merging overlapping
                 band closures; the union equals the union of the bands.
    gaps       : open complement components of the union inside
                 [Lambda_0, energy_cap].
    """

    bands: tuple
    energy_cap: float
    components: tuple = field(default=())
    gaps: tuple = field(default=())

    @property
    def lambda0(self) -> float:
        return min(b.alpha for b in self.bands)

    def kappa_of(self, lo: float, hi: float) -> int:
        """max |k| over bands meeting the closed interval [lo, hi]."""
        hits = [b.k_abs for b in self.bands if b.alpha <= hi and b.beta >= lo]
        return max(hits) if hits else -1

    def distance(self, x: float) -> float:
        """Euclidean distance from x to the union of the bands (0 inside)."""
        return min(b.distance(x) for b in self.bands)

    def in_gap(self, x: float) -> bool:
        """True when x lies outside every band (including below Lambda_0)."""
        return self.distance(x) > 0.0


def _merge_components(intervals):
    ivs = sorted(intervals)
    merged = []
    for lo, hi in ivs:
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [tuple(m) for m in merged]


def sigma_bands(samples: Iterable[FieldSample], k_max: int, energy_cap: float) -> SigmaSet:
    """Band set from a finite family of field samples.

    For each (k, mu) the band is [min, max] over samples of
    Lambda_{k, mu}(x); bands whose minimum exceeds ``energy_cap`` are
    dropped.  Overlapping band closures are merged into maximal closed
    components; the gaps are the open complement components in
    [Lambda_0, energy_cap].
    """
    lo_map: dict = {}
    hi_map: dict = {}
    n_samples = 0
    for s in samples:
        n_samples += 1
        a = s.frequencies()
        for k, mu, lam in landau_levels(a, s.V_eigs, k_max):
            key = (k, mu)
            if key not in lo_map:
                lo_map[key] = lam
                hi_map[key] = lam
            else:
                if lam < lo_map[key]:
                    lo_map[key] = lam
                if lam > hi_map[key]:
                    hi_map[key] = lam
    if n_samples == 0:
        raise ValueError("no field samples provided")
    bands = [
        Band(k_abs=sum(k), mu=mu, alpha=lo_map[(k, mu)], beta=hi_map[(k, mu)], k=k)
        for (k, mu) in lo_map
        if lo_map[(k, mu)] <= energy_cap
    ]
    if not bands:
        raise ValueError("energy_cap is below every band minimum")
    bands.sort(key=lambda b: (b.alpha, b.beta))
    lambda0 = bands[0].alpha
    if energy_cap <= lambda0:
        raise ValueError("energy_cap must exceed the sampled ground level")
    components = _merge_components((b.alpha, b.beta) for b in bands)
    gaps = []
    for (lo1, hi1), (lo2, _) in zip(components, components[1:]):
        if hi1 < lo2:
            gaps.append((hi1, min(lo2, energy_cap)))
    last_hi = components[-1][1]
    if last_hi < energy_cap:
        gaps.append((last_hi, energy_cap))
    gaps = [tuple(g) for g in gaps if g[0] < min(g[1], energy_cap)]
    return SigmaSet(
        bands=tuple(bands),
        energy_cap=float(energy_cap),
        components=tuple(components),
        gaps=tuple(gaps),
    )


def model_counting(sample: FieldSample, lam: float) -> int:
    """N(x, lam) = #{(k, mu) : Lambda_{k, mu} <= lam}.

    Finite because all frequencies are >= b0 > 0; right-continuous and
    non-decreasing in lam.
    """
    a = sample.frequencies()
    n = a.size
    count = 0
    for v in sample.V_eigs:
        budget = lam - v - a.sum()
        if budget < 0:
            continue
        # count multi-indices k >= 0 with 2 * sum k_j a_j <= budget
        def rec(j: int, rem: float) -> int:
            if j == n:
                return 1
            kmax = int(np.floor(rem / (2.0 * a[j]) + 1e-12))
            total = 0
            for k in range(kmax + 1):
                total += rec(j + 1, rem - 2.0 * k * a[j])
            return total

        count += rec(0, budget)
    return count


def _pair_modes(a, Z, Zp):
    """Complex mode coordinates z_k = Z_{2k-1} + i Z_{2k} for both points."""
    a = np.asarray(a, dtype=float)
    Z = np.asarray(Z, dtype=float)
    Zp = np.asarray(Zp, dtype=float)
    n = a.size
    if Z.shape[-1] != 2 * n or Zp.shape[-1] != 2 * n:
        raise ValueError("points must have 2n coordinates")
    z = Z[..., 0::2] + 1j * Z[..., 1::2]
    zp = Zp[..., 0::2] + 1j * Zp[..., 1::2]
    return a, z, zp


def bergman_kernel(a, Z, Zp):
    """Gaussian reproducing kernel of the lowest level.

    value = (2 pi)^{-n} (prod a_j) exp(-1/4 sum_k a_k (|z_k|^2 + |z'_k|^2
    - 2 z_k conj(z'_k))).  Broadcasts over leading axes of Z / Zp; scalar
    inputs give a complex scalar.  Hermitian: value(Z, Zp) =
    conj(value(Zp, Z)).
    """
    a, z, zp = _pair_modes(a, Z, Zp)
    expo = -0.25 * np.sum(
        a * (np.abs(z) ** 2 + np.abs(zp) ** 2 - 2.0 * z * np.conj(zp)), axis=-1
    )
    amp = a.prod() / (2.0 * np.pi) ** a.size
    out = amp * np.exp(expo)
    return complex(out) if np.ndim(out) == 0 else out


def landau_level_kernel(a, k, Z, Zp):
    """Projector kernel of the level with multi-index k (V = 0).

    Per 2D mode:  (a/2pi) L_k(a |z - z'|^2 / 2) exp(-(a/4)(|z|^2 + |z'|^2
    - 2 z conj(z'))), multiplied over the n modes.  k = 0 reproduces
    `bergman_kernel`.  The closed form is validated in the test suite
    against a dense discretization of the model operator.
    """
    a, z, zp = _pair_modes(a, Z, Zp)
    k = tuple(int(kj) for kj in np.atleast_1d(k))
    if len(k) != a.size or any(kj < 0 for kj in k):
        raise ValueError("k must be a componentwise nonnegative multi-index of length n")
    out = None
    for j, kj in enumerate(k):
        zj, zpj = z[..., j], zp[..., j]
        expo = -0.25 * a[j] * (
            np.abs(zj) ** 2 + np.abs(zpj) ** 2 - 2.0 * zj * np.conj(zpj)
        )
        lag = eval_laguerre(kj, 0.5 * a[j] * np.abs(zj - zpj) ** 2)
        mode = (a[j] / (2.0 * np.pi)) * lag * np.exp(expo)
        out = mode if out is None else out * mode
    return complex(out) if np.ndim(out) == 0 else out
