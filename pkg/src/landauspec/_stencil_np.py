"""Pure-numpy magnetic 5-point stencil matvec (fallback backend).

Grid functions are stored row-major with flat index r = i * N + j, where i is
the x index and j the y index.  The stencil is

    (H v)(i, j) = scale * (4 v(i,j)
                           - ux(i,j)   v(i+1,j) - conj(ux(i-1,j)) v(i-1,j)
                           - uy(i,j)   v(i,j+1) - conj(uy(i,j-1)) v(i,j-1))
                  + diag(i,j) v(i,j)

with periodic wraparound; ux / uy are the +x / +y link phases.
"""
from __future__ import annotations

import numpy as np


def apply_stencil(phases_x, phases_y, diag, scale, v):
    """Apply the stencil to one vector (N*N,) or a block (N*N, k)."""
    N = phases_x.shape[0]
    F = np.ascontiguousarray(v).reshape(N, N, -1)
    ux = phases_x[..., None]
    uy = phases_y[..., None]
    out = (4.0 * scale + diag[..., None]) * F
    out -= scale * ux * np.roll(F, -1, axis=0)
    out -= scale * np.roll(np.conj(ux) * F, 1, axis=0)
    out -= scale * uy * np.roll(F, -1, axis=1)
    out -= scale * np.roll(np.conj(uy) * F, 1, axis=1)
    return out.reshape(v.shape)
