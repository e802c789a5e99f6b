# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled magnetic 5-point stencil matvec (hot kernel of the eigensolver).

Same contract as the numpy fallback: flat index r = i * N + j, periodic
wraparound, +x / +y link phases ux / uy.
"""
import numpy as np

cimport numpy as cnp

cnp.import_array()


def apply_stencil(cnp.ndarray phases_x, cnp.ndarray phases_y,
                  cnp.ndarray diag, double scale, cnp.ndarray v):
    """Apply the stencil to one vector (N*N,) or a block (N*N, k)."""
    cdef Py_ssize_t N = phases_x.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] ux = np.ascontiguousarray(phases_x, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] uy = np.ascontiguousarray(phases_y, dtype=np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] d = np.ascontiguousarray(diag, dtype=np.float64)

    single = v.ndim == 1
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] vin
    if single:
        vin = np.ascontiguousarray(v, dtype=np.complex128).reshape(N * N, 1)
    else:
        vin = np.ascontiguousarray(v, dtype=np.complex128)
    cdef Py_ssize_t k = vin.shape[1]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = np.empty((N * N, k), dtype=np.complex128)

    cdef Py_ssize_t i, j, c, r, ip, im, jp, jm, rxp, rxm, ryp, rym
    cdef double complex hop
    cdef double base
    for i in range(N):
        ip = i + 1 if i + 1 < N else 0
        im = i - 1 if i > 0 else N - 1
        for j in range(N):
            jp = j + 1 if j + 1 < N else 0
            jm = j - 1 if j > 0 else N - 1
            r = i * N + j
            rxp = ip * N + j
            rxm = im * N + j
            ryp = i * N + jp
            rym = i * N + jm
            base = 4.0 * scale + d[i, j]
            for c in range(k):
                hop = ux[i, j] * vin[rxp, c]
                hop = hop + (ux[im, j].conjugate()) * vin[rxm, c]
                hop = hop + uy[i, j] * vin[ryp, c]
                hop = hop + (uy[i, jm].conjugate()) * vin[rym, c]
                out[r, c] = base * vin[r, c] - scale * hop
    if single:
        return out.reshape(N * N)
    return out
