"""Windowed Hermitian eigensolver with completeness certificates.

Two extraction paths share one contract:

* dense (dim <= 2000 or plain-array input): full diagonalization, then
  window selection;
* sparse: block Lanczos with FULL reorthogonalization on the shift-inverted
  operator (H - sigma)^{-1}, sigma at the window center, with Rayleigh-Ritz
  extraction on H itself.  Plain (non-inverted) block Lanczos from the
  bottom is the fallback when no factorization can be obtained.

Either way the result is certified complete against `count_in`, which
computes the exact eigenvalue count in the window by Sylvester inertia of
two shifted LDL-type factorizations - a route entirely independent of the
eigeniteration.  Each returned pair carries the residual ||H v - lambda v||.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NoConvergence, ShiftSingular, WindowBoundaryHit
from .lattice import LatticeOperator

DENSE_THRESHOLD = 2000


# ---------------------------------------------------------------------------
# operator adapter


class _Op:
    """Uniform view of LatticeOperator / ndarray / scipy sparse inputs."""

    def __init__(self, op):
        self.raw = op
        if isinstance(op, LatticeOperator):
            self.dim = op.dim
            self.kind = "lattice"
        elif sp.issparse(op):
            if op.shape[0] != op.shape[1]:
                raise ValueError("operator must be square")
            self.dim = op.shape[0]
            self.kind = "sparse"
        else:
            op = np.asarray(op)
            if op.ndim != 2 or op.shape[0] != op.shape[1]:
                raise ValueError("operator must be square")
            self.raw = op
            self.dim = op.shape[0]
            self.kind = "dense"

    def matvec(self, v):
        if self.kind == "lattice":
            return self.raw.matvec(v)
        return self.raw @ v

    def to_sparse(self):
        if self.kind == "lattice":
            return self.raw.to_sparse()
        if self.kind == "sparse":
            return self.raw.tocsr()
        return sp.csr_matrix(self.raw)

    def to_dense(self):
        if self.kind == "lattice":
            return self.raw.to_dense()
        if self.kind == "sparse":
            return self.raw.toarray()
        return self.raw

    def scale(self) -> float:
        """Spectral scale: max |lambda| bound from Gershgorin disks."""
        if self.kind == "lattice":
            lo, hi = self.raw.gershgorin_interval()
            return max(abs(lo), abs(hi), 1e-300)
        H = self.to_sparse()
        radii = np.abs(H).sum(axis=1)
        return float(np.max(radii))


# ---------------------------------------------------------------------------
# inertia / counting

_PIVOT_REL_TOL = 1e-12


def _inertia_dense(A: np.ndarray, scale: float) -> int:
    """Number of negative eigenvalues of Hermitian A via LDL^*."""
    _, d, _ = sla.ldl(A, lower=True, hermitian=True)
    n = A.shape[0]
    tiny = _PIVOT_REL_TOL * max(scale, 1.0)
    neg = 0
    i = 0
    while i < n:
        if i + 1 < n and abs(d[i, i + 1]) > 0.0:
            # 2x2 block [[a, b], [conj(b), c]] with real a, c
            a, c = d[i, i].real, d[i + 1, i + 1].real
            det = a * c - abs(d[i, i + 1]) ** 2
            if abs(det) < tiny * tiny:
                raise ShiftSingular("near-singular 2x2 pivot block in LDL")
            if det < 0.0:
                neg += 1
            elif a + c < 0.0:
                neg += 2
            i += 2
        else:
            piv = d[i, i].real
            if abs(piv) < tiny:
                raise ShiftSingular("near-zero pivot in LDL")
            if piv < 0.0:
                neg += 1
            i += 1
    return neg


def _inertia_sparse(A: sp.spmatrix, scale: float) -> int:
    """Negative-eigenvalue count from an unpivoted symmetric-mode LU.

    With diagonal pivoting disabled and a symmetric fill-reducing ordering,
    SuperLU computes A = L U with L unit lower triangular, so diag(U) plays
    the role of D in LDL^* and its signs carry the inertia.
    """
    try:
        lu = spla.splu(
            A.tocsc(),
            permc_spec="MMD_AT_PLUS_A",
            diag_pivot_thresh=0.0,
            options={"SymmetricMode": True},
        )
    except RuntimeError as exc:  # exactly singular
        raise ShiftSingular(str(exc)) from exc
    d = lu.U.diagonal()
    tiny = _PIVOT_REL_TOL * max(scale, 1.0)
    if np.abs(d).min() < tiny:
        raise ShiftSingular("near-zero pivot in sparse factorization")
    if np.abs(d.imag).max() > 1e-6 * np.abs(d).max():
        # pivoting lost symmetry; fall back to the dense route upstream
        raise ShiftSingular("factorization left the Hermitian regime")
    return int(np.count_nonzero(d.real < 0.0))


def _inertia(op: _Op, sigma: float, scale: float) -> int:
    use_dense = op.kind == "dense" or op.dim <= DENSE_THRESHOLD
    if use_dense:
        A = op.to_dense() - sigma * np.eye(op.dim)
        return _inertia_dense(A, scale)
    A = op.to_sparse() - sigma * sp.identity(op.dim, dtype=complex, format="csr")
    return _inertia_sparse(A, scale)


def count_in(op, lo: float, hi: float) -> int:
    """Exact number of eigenvalues in (lo, hi) by Sylvester inertia.

    Independent of `eigs_window`; used as its completeness certificate.  A
    near-singular shift is retried once with a relative perturbation of
    0.5e-10 * scale (inside the caller's guarantee that endpoints are at
    least 1e-10 * scale away from the spectrum) before ShiftSingular is
    raised.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    wrapped = _Op(op) if not isinstance(op, _Op) else op
    scale = wrapped.scale()
    counts = []
    for sigma in (lo, hi):
        try:
            counts.append(_inertia(wrapped, sigma, scale))
        except ShiftSingular:
            delta = 0.5e-10 * max(scale, 1.0)
            # nudging inward keeps the counted set identical under the
            # endpoint-separation precondition
            nudged = sigma + delta if sigma == lo else sigma - delta
            counts.append(_inertia(wrapped, nudged, scale))
    return counts[1] - counts[0]


# ---------------------------------------------------------------------------
# eigenpair extraction


@dataclass(frozen=True)
class EigenWindow:
    """Eigenpairs of a Hermitian operator inside an open energy window.

    values    : sorted eigenvalues in (lo, hi);
    vectors   : matching columns, orthonormal (V* V = I in the plain dot
                product; the grid-function normalization with cell measure
                1/N^2 is recovered by scaling with N, which the kernel
                module's N^2 prefactor absorbs);
    residuals : per-pair ||H v - lambda v||_2.
    """

    lo: float
    hi: float
    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    tol: float

    @property
    def count(self) -> int:
        return int(self.values.size)


def _fix_phases(V: np.ndarray) -> np.ndarray:
    """Make the largest-modulus component of each column real positive."""
    if V.size == 0:
        return V
    idx = np.argmax(np.abs(V), axis=0)
    lead = V[idx, np.arange(V.shape[1])]
    phase = lead / np.where(np.abs(lead) == 0.0, 1.0, np.abs(lead))
    return V * np.conj(phase)[None, :]


def _boundary_check(values: np.ndarray, lo: float, hi: float, btol: float) -> None:
    if values.size == 0:
        return
    near = np.minimum(np.abs(values - lo), np.abs(values - hi))
    if near.min() < btol:
        raise WindowBoundaryHit(
            f"eigenvalue {values[np.argmin(near)]:.12g} within {btol:.3g} of a window "
            f"endpoint ({lo:.12g}, {hi:.12g}); shift the window"
        )


def _residuals(op: _Op, values: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    if values.size == 0:
        return np.zeros(0)
    R = op.matvec(vectors) - vectors * values[None, :]
    return np.linalg.norm(R, axis=0)


def _dense_window(op: _Op, lo, hi, tol, btol):
    w, V = np.linalg.eigh(op.to_dense())
    _boundary_check(w, lo, hi, btol)
    mask = (w > lo) & (w < hi)
    values = w[mask]
    vectors = _fix_phases(V[:, mask])
    return values, vectors


def _shift_invert_solver(Hs: sp.csr_matrix, sigma: float, scale: float):
    A = (Hs - sigma * sp.identity(Hs.shape[0], dtype=complex, format="csr")).tocsc()
    try:
        return spla.splu(A)
    except RuntimeError as exc:
        raise ShiftSingular(str(exc)) from exc


def _orthonormalize_against(Z: np.ndarray, Q: np.ndarray | None) -> np.ndarray:
    """Full reorthogonalization (two classical Gram-Schmidt passes) + QR."""
    for _ in range(2):
        if Q is not None and Q.shape[1] > 0:
            Z = Z - Q @ (Q.conj().T @ Z)
    Z, R = np.linalg.qr(Z)
    keep = np.abs(np.diag(R)) > 1e-12 * max(1.0, np.abs(R).max())
    return Z[:, keep]


def _sparse_window(op: _Op, lo, hi, tol, btol, n_expect, seed, max_basis, max_sweeps):
    dim = op.dim
    scale = op.scale()
    Hs = op.to_sparse()
    sigma = 0.5 * (lo + hi)
    solver = None
    for trial, sig in enumerate((sigma, sigma + 1e-3 * (hi - lo), sigma - 2e-3 * (hi - lo))):
        try:
            solver = _shift_invert_solver(Hs, sig, scale)
            sigma = sig
            break
        except ShiftSingular:
            if trial == 2:
                raise
    rng = np.random.default_rng(seed)
    bs = int(min(max(n_expect + 6, 10), max(dim // 4, 1), 64))

    def random_block(k):
        Z = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
        return Z

    Q = _orthonormalize_against(random_block(bs), None)
    history = []
    for sweep in range(max_sweeps):
        Z = solver.solve(Q[:, -bs:] if Q.shape[1] >= bs else Q)
        Qn = _orthonormalize_against(Z, Q)
        if Qn.shape[1] == 0:
            # Krylov space exhausted; inject a fresh random block
            Qn = _orthonormalize_against(random_block(bs), Q)
            if Qn.shape[1] == 0:
                break
        Q = np.hstack([Q, Qn])
        if Q.shape[1] > max_basis:
            Q = Q[:, -max_basis:]
            Q = _orthonormalize_against(Q, None)
        # Rayleigh-Ritz on H over the accumulated basis
        HQ = op.matvec(Q)
        T = Q.conj().T @ HQ
        T = 0.5 * (T + T.conj().T)
        theta, S = np.linalg.eigh(T)
        inside = (theta > lo) & (theta < hi)
        n_inside = int(np.count_nonzero(inside))
        if n_inside >= n_expect:
            X = Q @ S[:, inside]
            vals = theta[inside]
            res = np.linalg.norm(HQ @ S[:, inside] - X * vals[None, :], axis=0)
            history.append((sweep, n_inside, float(res.max()) if res.size else 0.0))
            if n_inside == n_expect and (res.size == 0 or res.max() <= tol):
                return vals, X
        else:
            history.append((sweep, n_inside, np.inf))
    raise NoConvergence(
        f"window ({lo:.6g}, {hi:.6g}): expected {n_expect} eigenpairs, "
        f"progress {history[-5:]} after {max_sweeps} sweeps (basis {Q.shape[1]})"
    )


def eigs_window(
    op,
    lo: float,
    hi: float,
    tol: float | None = None,
    *,
    method: str = "auto",
    seed: int = 0,
    certify: bool = True,
    max_basis: int = 600,
    max_sweeps: int = 60,
) -> EigenWindow:
    """All eigenpairs of a Hermitian operator with eigenvalue in (lo, hi).

    Completeness is certified against `count_in` (skippable with
    certify=False for the dense path, which is complete by construction).
    Raises WindowBoundaryHit when an eigenvalue sits within tolerance of an
    endpoint, and NoConvergence with iteration diagnostics when the sparse
    path stalls.  Determinism: a fixed `seed` gives bit-stable eigenvalues
    (vectors stable up to the fixed per-vector phase convention).
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    wrapped = _Op(op)
    scale = wrapped.scale()
    if tol is None:
        tol = 1e-8 * scale
    btol = max(tol, 1e-12 * scale)
    if method == "auto":
        method = "dense" if (wrapped.kind == "dense" or wrapped.dim <= DENSE_THRESHOLD) else "lanczos"
    if method not in ("dense", "lanczos"):
        raise ValueError(f"unknown method {method!r}")

    n_expect = count_in(wrapped, lo, hi) if (certify or method == "lanczos") else None

    if method == "dense":
        values, vectors = _dense_window(wrapped, lo, hi, tol, btol)
    else:
        if n_expect == 0:
            values = np.zeros(0)
            vectors = np.zeros((wrapped.dim, 0), dtype=complex)
        else:
            values, vectors = _sparse_window(
                wrapped, lo, hi, tol, btol, n_expect, seed, max_basis, max_sweeps
            )
            _boundary_check(values, lo, hi, btol)
            order = np.argsort(values)
            values = values[order]
            vectors = _fix_phases(vectors[:, order])

    if n_expect is not None and values.size != n_expect:
        raise NoConvergence(
            f"found {values.size} eigenvalues in ({lo:.6g}, {hi:.6g}) but the inertia "
            f"count certifies {n_expect}"
        )
    vectors = np.ascontiguousarray(vectors.astype(complex, copy=False))
    residuals = _residuals(wrapped, values, vectors)
    if residuals.size and residuals.max() > tol:
        raise NoConvergence(
            f"residual certificate failed: max ||Hv - lambda v|| = {residuals.max():.3e} "
            f"> tol = {tol:.3e}"
        )
    return EigenWindow(
        lo=float(lo), hi=float(hi), values=values, vectors=vectors,
        residuals=residuals, tol=float(tol),
    )
