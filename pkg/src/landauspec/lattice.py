"""Magnetic lattice operator on an N x N periodic grid (Peierls substitution).

The operator is

    H = (N^2 / p) * (4 I - sum of link-phase hops) + diag(V samples),

whose low spectrum approximates the continuum magnetic Schroedinger operator
at tensor power p in the same energy units.  Link phases are exact line
integrals of the Landau-type gauge

    A = (0, A_y),   A_y(x, y) = integral_0^x b(s, y) ds,

so every plaquette carries exactly p times its continuum flux; the
periodicity defect of the gauge (A_y(1, y) - A_y(0, y) = 2 pi m) is absorbed
on the x = 1 seam links, making the discrete model a genuine connection of
total flux 2 pi p m.

Grid conventions: node (i, j) sits at (x_i, y_j) = (i/N, j/N); flat index
r = i * N + j; phases_x[i, j] is the phase on the +x link (i, j) -> (i+1, j)
and phases_y[i, j] on the +y link (i, j) -> (i, j+1).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import FluxAliased, NonUnitaryPhases
from .geometry import TWO_PI, TorusConfig, quantization_check, torus_grid
from .stencil import apply_stencil

UNIT_MODULUS_TOL = 1e-14


def default_grid_size(p: int) -> int:
    """N = max(32, ceil(8 sqrt(p))): >= 8 grid points per magnetic length."""
    return max(32, int(np.ceil(8.0 * np.sqrt(p))))


def _gauge_y_integrals(config: TorusConfig, p: int, N: int) -> np.ndarray:
    """theta_y[i, j] = -p * integral over the +y link at (i, j) of A_y dy.

    Exact closed forms for the named profiles.
    """
    m, eps = config.flux_m, config.epsilon
    h = 1.0 / N
    x = np.arange(N) / N
    y = np.arange(N) / N
    if config.profile == "constant" or eps == 0.0 or m == 0:
        col = TWO_PI * m * x * h
        return -p * np.repeat(col[:, None], N, axis=1)
    if config.profile == "cos_x":
        col = TWO_PI * m * h * (x + eps * np.sin(TWO_PI * x) / TWO_PI)
        return -p * np.repeat(col[:, None], N, axis=1)
    if config.profile == "cos_x_cos_y":
        ynext = (np.arange(N) + 1.0) / N
        dsin = (np.sin(TWO_PI * ynext) - np.sin(TWO_PI * y)) / TWO_PI
        base = TWO_PI * m * (x * h)
        mod = TWO_PI * m * eps * (np.sin(TWO_PI * x) / TWO_PI)
        return -p * (base[:, None] + mod[:, None] * dsin[None, :])
    raise ValueError(f"no closed-form gauge for profile {config.profile!r}")


def plaquette_fluxes(config: TorusConfig, N: int) -> np.ndarray:
    """Exact continuum flux of b through each grid cell, Phi[i, j]."""
    m, eps = config.flux_m, config.epsilon
    h = 1.0 / N
    x = np.arange(N) / N
    y = np.arange(N) / N
    xnext = (np.arange(N) + 1.0) / N
    ynext = (np.arange(N) + 1.0) / N
    flat = TWO_PI * m * h * h * np.ones((N, N))
    if config.profile == "constant" or eps == 0.0 or m == 0:
        return flat
    dsix = (np.sin(TWO_PI * xnext) - np.sin(TWO_PI * x)) / TWO_PI
    if config.profile == "cos_x":
        return flat + TWO_PI * m * eps * h * dsix[:, None] * np.ones((1, N))
    if config.profile == "cos_x_cos_y":
        dsiy = (np.sin(TWO_PI * ynext) - np.sin(TWO_PI * y)) / TWO_PI
        return flat + TWO_PI * m * eps * dsix[:, None] * dsiy[None, :]
    raise ValueError(f"no closed-form flux for profile {config.profile!r}")


@dataclass(frozen=True)
class LinkField:
    """Unit-modulus parallel-transport phases along +x and +y edges."""

    N: int
    phases_x: np.ndarray
    phases_y: np.ndarray

    def __post_init__(self):
        for name, ph in (("phases_x", self.phases_x), ("phases_y", self.phases_y)):
            if ph.shape != (self.N, self.N):
                raise ValueError(f"{name} must have shape (N, N)")
            if np.abs(np.abs(ph) - 1.0).max() > UNIT_MODULUS_TOL:
                raise NonUnitaryPhases(f"{name} deviates from unit modulus")

    def plaquette_args(self) -> np.ndarray:
        """arg of the oriented product around each cell (i, j).

        The product is ux(i,j) uy(i+1,j) conj(ux(i,j+1)) conj(uy(i,j)); its
        arg equals -p * Phi_ij mod 2 pi by construction.
        """
        ux, uy = self.phases_x, self.phases_y
        w = (
            ux
            * np.roll(uy, -1, axis=0)
            * np.conj(np.roll(ux, -1, axis=1))
            * np.conj(uy)
        )
        return np.angle(w)


def link_field(config: TorusConfig, p: int, N: int) -> LinkField:
    """Exact-line-integral link phases for the torus field at tensor power p."""
    theta_y = _gauge_y_integrals(config, p, N)
    phases_y = np.exp(1j * theta_y)
    phases_x = np.ones((N, N), dtype=complex)
    if config.flux_m > 0:
        # seam links (N-1, j) -> (0, j) carry the clutching phase
        # exp(i p * 2 pi m * y_j), absorbing the gauge periodicity defect.
        j = np.arange(N)
        phases_x[N - 1, :] = np.exp(1j * (TWO_PI * p * config.flux_m * j / N))
    return LinkField(N=N, phases_x=phases_x, phases_y=phases_y)


@dataclass(frozen=True)
class LatticeOperator:
    """Sparse Hermitian realization of the magnetic operator at power p.

    Entries are generated from the link field and potential samples; the
    matrix is Hermitian by construction (hops are emitted as conjugate
    pairs).  Immutable; `matvec` is safe for concurrent use.
    """

    N: int
    p: int
    links: LinkField
    diag: np.ndarray  # potential samples V(x_i, y_j), shape (N, N)
    config: Optional[TorusConfig] = None
    _sparse_cache: list = field(default_factory=list, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.N * self.N

    @property
    def scale(self) -> float:
        return self.N * self.N / self.p

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """H @ v for a vector (N^2,) or block (N^2, k)."""
        return apply_stencil(
            self.links.phases_x, self.links.phases_y, self.diag, self.scale, v
        )

    def to_sparse(self) -> sp.csr_matrix:
        """CSR form (cached); row sparsity <= 5."""
        if self._sparse_cache:
            return self._sparse_cache[0]
        N, s = self.N, self.scale
        idx = np.arange(N * N).reshape(N, N)
        rows, cols, vals = [], [], []
        # diagonal
        rows.append(idx.ravel())
        cols.append(idx.ravel())
        vals.append((4.0 * s + self.diag).ravel().astype(complex))
        # +x hops and their conjugates
        xp = np.roll(idx, -1, axis=0)
        rows.append(idx.ravel())
        cols.append(xp.ravel())
        vals.append((-s * self.links.phases_x).ravel())
        rows.append(xp.ravel())
        cols.append(idx.ravel())
        vals.append((-s * np.conj(self.links.phases_x)).ravel())
        # +y hops and their conjugates
        yp = np.roll(idx, -1, axis=1)
        rows.append(idx.ravel())
        cols.append(yp.ravel())
        vals.append((-s * self.links.phases_y).ravel())
        rows.append(yp.ravel())
        cols.append(idx.ravel())
        vals.append((-s * np.conj(self.links.phases_y)).ravel())
        H = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(N * N, N * N),
        ).tocsr()
        self._sparse_cache.append(H)
        return H

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def gershgorin_interval(self):
        """(lower, upper) bounds on the spectrum from Gershgorin disks."""
        lo = float(self.diag.min())  # hop radii cancel the 4*scale exactly
        hi = float(8.0 * self.scale + self.diag.max())
        return lo, hi

    def export_coordinate_text(self, path) -> int:
        """Write nonzeros as 'row col re im' lines; returns the line count."""
        H = self.to_sparse().tocoo()
        order = np.lexsort((H.col, H.row))
        with open(path, "w") as fh:
            fh.write(f"# dim {self.dim} p {self.p} N {self.N} nnz {H.nnz}\n")
            for k in order:
                v = H.data[k]
                fh.write(f"{H.row[k]} {H.col[k]} {v.real!r} {v.imag!r}\n")
        return int(H.nnz)


def assemble(config: TorusConfig, p: int, N: Optional[int] = None) -> LatticeOperator:
    """Assemble the lattice operator for `config` at tensor power p.

    N defaults to `default_grid_size(p)`.  Raises FluxAliased when
    p * max cell flux >= pi (grid too coarse to represent the phases
    faithfully).
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    N = default_grid_size(p) if N is None else int(N)
    if N < 8:
        raise ValueError("N must be >= 8")
    flux = plaquette_fluxes(config, N)
    max_flux = float(np.abs(flux).max())
    if p * max_flux >= np.pi:
        raise FluxAliased(
            f"p * max cell flux = {p * max_flux:.4f} >= pi at N = {N}; refine the grid"
        )
    if config.flux_m > 0:
        # sanity: the sampled field integrates to 2 pi m (propagates NotQuantized)
        X, Y = torus_grid(max(N, 64))
        quantization_check(config.b(X, Y))
    X, Y = torus_grid(N)
    V = np.asarray(config.V(X, Y), dtype=float)
    return LatticeOperator(N=N, p=p, links=link_field(config, p, N), diag=V, config=config)


def gauge_transform(op: LatticeOperator, site_phases: np.ndarray) -> LatticeOperator:
    """H' = U* H U with U = diag(site phases); the spectrum is unchanged.

    site_phases has shape (N, N) with |phase| = 1 (tolerance 1e-12), indexed
    like the grid.
    """
    s = np.asarray(site_phases, dtype=complex)
    if s.shape != (op.N, op.N):
        raise ValueError("site_phases must have shape (N, N)")
    if np.abs(np.abs(s) - 1.0).max() > 1e-12:
        raise NonUnitaryPhases("site phases deviate from unit modulus beyond 1e-12")
    s = s / np.abs(s)  # renormalize rounding-level deviations
    ux = np.conj(s) * op.links.phases_x * np.roll(s, -1, axis=0)
    uy = np.conj(s) * op.links.phases_y * np.roll(s, -1, axis=1)
    return LatticeOperator(
        N=op.N,
        p=op.p,
        links=LinkField(N=op.N, phases_x=ux, phases_y=uy),
        diag=op.diag,
        config=op.config,
    )
