"""Spectral projector kernels on the lattice and their comparison to the
model kernels: off-diagonal decay fits and the near-diagonal rescaled check.

The kernel is normalized as a density with respect to the flat volume form:

    P(x, x') = N^2 * sum_i v_i(x) conj(v_i(x')),

with the eigenvectors orthonormal in the plain dot product, so the discrete
trace rule (1/N^2) sum_x P(x, x) = (number of eigenvalues in the window)
holds exactly up to orthonormality error.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyWindow, InsufficientRange, WindowBandMismatch
from .eigensolve import EigenWindow
from .model import landau_level_kernel

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class KernelGrid:
    """Sampled projector kernel rows P(x_b, .) for base points x_b.

    values[b] is the full grid row for base point b, shape (N, N); diagonal
    holds P(x, x) for every grid node; count is the number of eigenpairs
    behind the projector.
    """

    p: int
    N: int
    window: tuple
    base_points: tuple
    values: np.ndarray  # (n_base, N, N) complex
    diagonal: np.ndarray  # (N, N) real
    count: int

    def row(self, b: int) -> np.ndarray:
        return self.values[b]


def min_image_delta(N: int, i: np.ndarray, i0: int) -> np.ndarray:
    """Signed minimum-image index offset i - i0 on the N-cycle, in [-N/2, N/2)."""
    d = (np.asarray(i) - i0) % N
    return np.where(d >= N - N // 2, d - N, d) if N % 2 == 0 else np.where(d > N // 2, d - N, d)


def torus_distance(N: int, base: tuple, ii: np.ndarray, jj: np.ndarray) -> np.ndarray:
    """Flat-torus geodesic distance between grid node `base` and nodes (ii, jj)."""
    di = np.abs(min_image_delta(N, ii, base[0])) / N
    dj = np.abs(min_image_delta(N, jj, base[1])) / N
    return np.hypot(di, dj)


def projector_kernel(
    ew: EigenWindow,
    base_points: Sequence[tuple],
    N: int,
    p: int,
    rel_tol: float = 1e-8,
) -> KernelGrid:
    """Kernel rows P(x_b, x') for every grid point x'.

    The result is independent (to orthonormality accuracy) of the basis
    chosen inside degenerate clusters, because only the span enters.
    Validates the Hermitian property on base-point pairs and the discrete
    trace rule; raises EmptyWindow when `ew` has no eigenpairs.
    """
    if ew.count == 0:
        raise EmptyWindow(f"no eigenpairs in window ({ew.lo:.6g}, {ew.hi:.6g})")
    M = ew.vectors  # (N^2, k), orthonormal columns
    if M.shape[0] != N * N:
        raise ValueError("eigenvector length does not match the grid")
    base_points = tuple((int(i) % N, int(j) % N) for i, j in base_points)
    flat = np.array([i * N + j for i, j in base_points])
    n_base = len(base_points)
    values = np.empty((n_base, N * N), dtype=complex)
    Mb = M[flat]  # (n_base, k)
    chunk = max(1, min(n_base, int(2**23 / max(N * N, 1)) or 1))
    for start in range(0, n_base, chunk):
        sl = slice(start, start + chunk)
        values[sl] = (N * N) * (Mb[sl] @ M.conj().T)
    values = values.reshape(n_base, N, N)
    diagonal = (N * N) * np.sum(np.abs(M) ** 2, axis=1).reshape(N, N)
    # trace rule certificate
    trace = float(diagonal.mean())
    if abs(trace - ew.count) > rel_tol * max(ew.count, 1):
        raise ValueError(
            f"trace rule violated: (1/N^2) sum P(x,x) = {trace!r} vs count {ew.count}"
        )
    # Hermitian property on the base-pair submatrix (vectorized gather)
    sub = values.reshape(n_base, N * N)[:, flat]  # P(x_a, x_b)
    herm = float(np.abs(sub - sub.conj().T).max())
    if herm > 1e-12 * max(1.0, float(np.abs(sub).max())):
        raise ValueError(f"Hermitian symmetry violated on base pairs ({herm:.3e})")
    return KernelGrid(
        p=p,
        N=N,
        window=(ew.lo, ew.hi),
        base_points=base_points,
        values=values,
        diagonal=diagonal,
        count=ew.count,
    )


def compose_check(kg: KernelGrid, a_idx: int = 0) -> float:
    """max |(1/N^2) sum_w P(x_a, w) P(w, x_b) - P(x_a, x_b)| over base pairs.

    Discrete idempotency; requires the kernel rows of every base point.
    """
    N = kg.N
    err = 0.0
    for b, (ib, jb) in enumerate(kg.base_points):
        col_b = np.conj(kg.values[b]).ravel()  # P(w, x_b)
        for a in range(len(kg.base_points)):
            comp = kg.values[a].ravel() @ col_b / (N * N)
            err = max(err, abs(comp - kg.values[a, ib, jb]))
    return float(err)


def decay_fit(
    kg: KernelGrid,
    p: int,
    s_max: float = 3.0,
    noise_floor: float = 1e-13,
    min_bins: int = 5,
) -> tuple:
    """(c_hat, C_hat, r_squared) of the envelope fit log|P| ~ -c * sqrt(p) d.

    Pairs are binned by the rescaled distance s = sqrt(p) * d with bin width
    one grid step; within each bin the max-|P| pair is kept (envelope) at
    its exact s.  Pairs below `noise_floor` * max|P| are dropped; fewer than
    `min_bins` surviving bins raise InsufficientRange.  The fit window
    s <= s_max keeps the fitted rate comparable across tensor powers (the
    decay bound is a function of s alone).
    """
    N = kg.N
    base = kg.base_points[0]
    P = np.abs(kg.values[0])
    ii, jj = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    d = torus_distance(N, base, ii, jj)
    s = np.sqrt(p) * d
    pmax = float(P.max())
    keep = (P >= noise_floor * pmax) & (s > 0.0) & (s <= s_max)
    if not np.any(keep):
        raise InsufficientRange("no kernel pairs survive the noise floor")
    s_k = s[keep].ravel()
    logP_k = np.log(P[keep].ravel())
    width = np.sqrt(p) / N
    nbin = int(np.ceil(s_max / width)) + 1
    idx = np.minimum((s_k / width).astype(int), nbin - 1)
    xs, ys = [], []
    for b in np.unique(idx):
        sel = idx == b
        j = np.argmax(logP_k[sel])
        xs.append(s_k[sel][j])
        ys.append(logP_k[sel][j])
    if len(xs) < min_bins:
        raise InsufficientRange(
            f"only {len(xs)} distance bins survive the noise floor (need {min_bins})"
        )
    x = np.asarray(xs)
    y = np.asarray(ys)
    slope, intercept = np.polyfit(x, y, 1)
    yhat = slope * x + intercept
    ss_res = float(np.sum((y - yhat) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(-slope), float(np.exp(intercept)), float(r2)


def ball_nodes(N: int, p: int, x0: tuple, w_max: float) -> list:
    """Grid nodes whose rescaled displacement W = sqrt(p) * Z from x0 has
    |W| <= w_max (minimum-image Z)."""
    ii, jj = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    w = np.sqrt(p) * torus_distance(N, (int(x0[0]), int(x0[1])), ii, jj)
    sel = w <= w_max
    return [(int(i), int(j)) for i, j in zip(ii[sel].ravel(), jj[sel].ravel())]


@dataclass(frozen=True)
class NearDiagonalReport:
    sup_rel_error: float
    mode: str
    n_pairs: int
    w_spacing: float  # W-grid resolution sqrt(p)/N (nearest-node sampling error scale)
    diag_value: float  # p^{-n} P(x0, x0)
    model_diag: float  # F0(0, 0)


def _rescaled_coords(N: int, p: int, x0: tuple, nodes: np.ndarray) -> np.ndarray:
    di = min_image_delta(N, nodes[:, 0], x0[0]) / N
    dj = min_image_delta(N, nodes[:, 1], x0[1]) / N
    return np.sqrt(p) * np.stack([di, dj], axis=1)


def symmetric_gauge_phase(b: float, x0: tuple, Z: np.ndarray) -> np.ndarray:
    """chi with e^{-i p chi} carrying the Landau-gauge kernel to the
    symmetric gauge centered at x0 (constant field b); Z are displacements
    from x0 = (x0_x, x0_y) in torus coordinates."""
    return 0.5 * b * (Z[:, 0] * Z[:, 1] + 2.0 * x0[0] * Z[:, 1])


def near_diagonal_compare(
    kg: KernelGrid,
    a: Sequence[float],
    p: int,
    x0: tuple,
    w_max: float = 4.0,
    bands: Sequence[tuple] = ((0,),),
    mode: str = "modulus",
    expected_count: Optional[float] = None,
    x0_coords: Optional[tuple] = None,
    chunk: int = 256,
) -> NearDiagonalReport:
    """sup over node pairs in the |W| <= w_max ball of
    |p^{-n} P(x0 + W/sqrt(p), x0 + W'/sqrt(p)) - F0(W, W')| / sup |F0|.

    F0 is the model projector kernel summed over `bands` (multi-indices in
    the window).  `kg` must have been built with base_points covering the
    ball (see `ball_nodes`).  mode "modulus" compares |P| with |F0|
    (unconditionally gauge-safe); mode "phase_corrected" multiplies the
    lattice kernel by the explicit Landau-to-symmetric transition phase and
    compares complex values.  Raises WindowBandMismatch when the eigencount
    behind `kg` differs from `expected_count` by more than 10%.
    """
    a = np.asarray(a, dtype=float)
    n = a.size
    if mode not in ("modulus", "phase_corrected"):
        raise ValueError(f"unknown mode {mode!r}")
    if expected_count is not None and expected_count > 0:
        if abs(kg.count - expected_count) > 0.10 * expected_count:
            raise WindowBandMismatch(
                f"window holds {kg.count} eigenvalues but the model predicts "
                f"{expected_count:.6g}"
            )
    N = kg.N
    x0 = (int(x0[0]) % N, int(x0[1]) % N)
    nodes = np.array(ball_nodes(N, p, x0, w_max))
    pos = {pt: i for i, pt in enumerate(kg.base_points)}
    try:
        rows = np.array([pos[(int(i), int(j))] for i, j in nodes])
    except KeyError as exc:
        raise ValueError("kernel grid base points do not cover the ball") from exc
    W = _rescaled_coords(N, p, x0, nodes)
    flat = nodes[:, 0] * N + nodes[:, 1]
    sup_f0 = float(len(bands) * a.prod() / TWO_PI ** n)  # every level kernel has constant diagonal
    pn = float(p) ** n
    if mode == "phase_corrected":
        b_const = float(a[0]) if n == 1 else None
        if b_const is None:
            raise ValueError("phase_corrected mode is defined for n = 1")
        x0c = x0_coords if x0_coords is not None else (x0[0] / N, x0[1] / N)
        chi = symmetric_gauge_phase(b_const, x0c, W / np.sqrt(p))
        corr = np.exp(-1j * p * chi)
    sup_err = 0.0
    i0 = pos[x0]
    diag_value = float(kg.values[i0, x0[0], x0[1]].real) / pn
    for start in range(0, len(nodes), chunk):
        sl = slice(start, start + chunk)
        Pc = kg.values[rows[sl]].reshape(len(rows[sl]), -1)[:, flat] / pn
        F0 = np.zeros(Pc.shape, dtype=complex)
        for k in bands:
            F0 += landau_level_kernel(a, k, W[sl][:, None, :], W[None, :, :])
        if mode == "modulus":
            err = np.abs(np.abs(Pc) - np.abs(F0))
        else:
            Pc = corr[sl][:, None] * Pc * np.conj(corr)[None, :]
            err = np.abs(Pc - F0)
        sup_err = max(sup_err, float(err.max()))
    return NearDiagonalReport(
        sup_rel_error=sup_err / sup_f0,
        mode=mode,
        n_pairs=len(nodes) ** 2,
        w_spacing=float(np.sqrt(p) / N),
        diag_value=diag_value,
        model_diag=sup_f0,
    )
