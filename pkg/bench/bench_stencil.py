"""Benchmark the magnetic stencil matvec: compiled extension vs numpy.

Run after installing the package:

    python bench/bench_stencil.py

Prints a table of best-of-5 timings for single vectors and blocks of 8 on a
few grid sizes, plus the agreement between backends.
"""
from __future__ import annotations

import time

import numpy as np

from landauspec import TorusConfig, assemble
from landauspec.stencil import BACKEND, apply_stencil, apply_stencil_numpy


def best_of(fn, repeats=5, inner=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(inner):
            fn()
        best = min(best, (time.perf_counter() - t0) / inner)
    return best


def main():
    if BACKEND == "numpy":
        print("compiled extension not available; timing the numpy fallback only")
    rng = np.random.default_rng(7)
    cfg = TorusConfig(flux_m=1, epsilon=0.1, profile="cos_x")
    print(f"{'N':>5} {'block':>5} {'numpy ms':>10} {BACKEND + ' ms':>12} {'speedup':>8}")
    for N in (64, 128, 256):
        op = assemble(cfg, p=16, N=N)
        ux, uy = op.links.phases_x, op.links.phases_y
        diag = op.diag.ravel()
        for k in (1, 8):
            shape = (N * N,) if k == 1 else (N * N, k)
            v = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
            t_np = best_of(lambda: apply_stencil_numpy(ux, uy, diag, op.scale, v))
            t_ext = best_of(lambda: apply_stencil(ux, uy, diag, op.scale, v))
            r_np = apply_stencil_numpy(ux, uy, diag, op.scale, v)
            r_ext = apply_stencil(ux, uy, diag, op.scale, v)
            err = np.abs(r_np - r_ext).max() / np.abs(r_np).max()
            assert err < 1e-12, f"backend mismatch: {err:.3e}"
            print(f"{N:>5} {k:>5} {t_np * 1e3:>10.3f} {t_ext * 1e3:>12.3f} "
                  f"{t_np / t_ext:>8.2f}")
    print("backends agree to < 1e-12 relative on all cases above")


if __name__ == "__main__":
    main()
