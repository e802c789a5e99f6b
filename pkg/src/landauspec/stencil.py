"""Stencil backend selection: compiled extension when available, numpy otherwise.

`apply_stencil(phases_x, phases_y, diag, scale, v)` applies the magnetic
5-point stencil to a vector (N*N,) or block (N*N, k); see `_stencil_np` for
the index conventions.  `BACKEND` records which implementation was picked at
import time.
"""
from __future__ import annotations

try:  # compiled core (built by setup.py when Cython + a C compiler exist)
    from ._stencil import apply_stencil  # noqa: F401

    BACKEND = "compiled"
except ImportError:  # pragma: no cover - exercised on installs without the ext
    from ._stencil_np import apply_stencil  # noqa: F401

    BACKEND = "numpy"

from . import _stencil_np

#: always-available reference implementation (used by the benchmark and tests)
apply_stencil_numpy = _stencil_np.apply_stencil
