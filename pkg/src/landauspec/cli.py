"""Command-line driver.

Subcommands map one-to-one onto the library's experiment types::

    landauspec sigma      --config exp.cfg          band structure + gaps
    landauspec cluster    --config exp.cfg          eigenvalue distances vs p
    landauspec demailly   --config exp.cfg          window counts vs predicted
    landauspec kernel     --config exp.cfg          projector kernel rows
    landauspec decay      --config exp.cfg          off-diagonal decay fits
    landauspec neardiag   --config exp.cfg          rescaled kernel comparison
    landauspec sphere     --config exp.cfg          closed-form sphere table
    landauspec export-matrix --config exp.cfg       coordinate-format operator

Exit status: 0 on success, 2 when a configured threshold is breached, 1 on
error.  Per-p work runs in worker processes when --jobs > 1; outputs are
merged in p order, so CSV outputs are byte-identical for a fixed config and
seed regardless of --jobs.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .analysis import (
    band_window,
    demailly_compare,
    distance_to_sigma,
    rate_fit,
    sigma_for_torus,
    sphere_exact,
    sphere_sigma,
)
from .config import ExperimentConfig, load_config_file, resolve_config
from .eigensolve import count_in, eigs_window
from .errors import ConfigError, InsufficientPoints, LandauSpecError
from .kernels import ball_nodes, decay_fit, near_diagonal_compare, projector_kernel
from .lattice import assemble

log = logging.getLogger("landauspec")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    log.info("wrote %s (%d rows)", path, len(rows))


def _write_dat(path: str, comment: str, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# {comment}\n")
        for row in rows:
            fh.write(" ".join(_fmt(v) for v in row) + "\n")


def _write_summary(path: str, cfg: ExperimentConfig, payload: dict) -> None:
    doc = {"config": dataclasses.asdict(cfg), **payload}
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_fmt)
        fh.write("\n")
    log.info("wrote %s", path)


def _require_torus(cfg: ExperimentConfig, command: str) -> None:
    if cfg.manifold != "torus":
        raise ConfigError(f"{command} requires manifold = torus")


def _resolve_window(cfg: ExperimentConfig, sigma) -> tuple:
    if cfg.window_lo is not None:
        return (cfg.window_lo, cfg.window_hi)
    band = cfg.window_band if cfg.window_band is not None else 0
    return band_window(sigma, band)


def _breach(thresholds: dict, name: str, value: float, larger_is_breach: bool = True) -> bool:
    if name not in thresholds:
        return False
    limit = thresholds[name]
    breached = value > limit if larger_is_breach else value < limit
    if breached:
        log.warning("threshold %s breached: %r vs limit %r", name, value, limit)
    return breached


# ---------------------------------------------------------------------------
# per-p workers (module level: must be picklable for ProcessPoolExecutor)

def _cluster_p(cfg: ExperimentConfig, p: int, window: tuple, sigma) -> dict:
    op = assemble(cfg.torus_config(), p, N=cfg.grid_size(p))
    ew = eigs_window(op, window[0], window[1], tol=cfg.tol_eigensolver,
                     seed=cfg.seed + p)
    rep = distance_to_sigma(ew.values, sigma, p=p)
    return {
        "p": p,
        "N": op.N,
        "rows": [(p, i, lam, d) for i, (lam, d) in enumerate(rep.per_eig_dist)],
        "count": ew.count,
        "max_dist": rep.max_dist,
        "witness": rep.witness,
    }


def _demailly_p(cfg: ExperimentConfig, p: int, window: tuple, sigma) -> dict:
    op = assemble(cfg.torus_config(), p, N=cfg.grid_size(p))
    count = count_in(op, window[0], window[1])
    predicted, rel_err = demailly_compare(cfg.torus_config(), p, window, count,
                                          sigma=sigma, resolution=cfg.quad_resolution)
    return {
        "p": p,
        "N": op.N,
        "rows": [(p, count, predicted, rel_err)],
        "count": count,
        "predicted": predicted,
        "rel_err": rel_err,
    }


def _kernel_grid_p(cfg: ExperimentConfig, p: int, window: tuple):
    op = assemble(cfg.torus_config(), p, N=cfg.grid_size(p))
    ew = eigs_window(op, window[0], window[1], tol=cfg.tol_eigensolver,
                     seed=cfg.seed + p)
    N = op.N
    base = cfg.kernel_base if cfg.kernel_base is not None else (0, 0)
    return op, ew, N, base


def _kernel_p(cfg: ExperimentConfig, p: int, window: tuple, sigma) -> dict:
    op, ew, N, base = _kernel_grid_p(cfg, p, window)
    kg = projector_kernel(ew, [base], N, p)
    row = kg.values[0]
    rows = [(p, i, j, row[i, j].real, row[i, j].imag)
            for i in range(N) for j in range(N)]
    n_modes = 1  # torus experiments are one-mode
    diag = float(row[base].real) / float(p) ** n_modes
    return {
        "p": p,
        "N": N,
        "rows": rows,
        "count": kg.count,
        "trace": float(kg.diagonal.mean()),
        "scaled_diag": diag,
    }


def _decay_p(cfg: ExperimentConfig, p: int, window: tuple, sigma) -> dict:
    op, ew, N, base = _kernel_grid_p(cfg, p, window)
    kg = projector_kernel(ew, [base], N, p)
    c_hat, C_hat, r2 = decay_fit(kg, p, s_max=cfg.decay_s_max)
    return {
        "p": p,
        "N": N,
        "rows": [(p, c_hat, C_hat, r2)],
        "c_hat": c_hat,
        "C_hat": C_hat,
        "r_squared": r2,
    }


def _neardiag_p(cfg: ExperimentConfig, p: int, window: tuple, sigma) -> dict:
    tc = cfg.torus_config()
    op = assemble(tc, p, N=cfg.grid_size(p))
    ew = eigs_window(op, window[0], window[1], tol=cfg.tol_eigensolver,
                     seed=cfg.seed + p)
    N = op.N
    base = cfg.kernel_base if cfg.kernel_base is not None else (0, 0)
    nodes = ball_nodes(N, p, base, cfg.kernel_w_max)
    kg = projector_kernel(ew, nodes, N, p)
    bands = sorted({b.k for b in sigma.bands
                    if window[0] < b.alpha and b.beta < window[1]})
    x0c = (base[0] / N, base[1] / N)
    a0 = tc.b(x0c[0], x0c[1])
    rep = near_diagonal_compare(
        kg, [a0], p, base, w_max=cfg.kernel_w_max, bands=bands,
        mode=cfg.kernel_mode, expected_count=None, x0_coords=x0c)
    return {
        "p": p,
        "N": N,
        "rows": [(p, rep.sup_rel_error, rep.diag_value, rep.w_spacing, rep.n_pairs)],
        "sup_rel_error": rep.sup_rel_error,
        "diag_value": rep.diag_value,
    }


_WORKERS = {
    "cluster": _cluster_p,
    "demailly": _demailly_p,
    "kernel": _kernel_p,
    "decay": _decay_p,
    "neardiag": _neardiag_p,
}


def _worker_entry(task: tuple) -> dict:
    command, cfg, p, window, sigma = task
    return _WORKERS[command](cfg, p, window, sigma)


def _run_per_p(command: str, cfg: ExperimentConfig, window: tuple, sigma,
               jobs: int) -> list:
    tasks = [(command, cfg, p, window, sigma) for p in cfg.p_list]
    if jobs <= 1 or len(tasks) == 1:
        results = [_worker_entry(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as ex:
            results = list(ex.map(_worker_entry, tasks))
    return sorted(results, key=lambda r: cfg.p_list.index(r["p"]))


# ---------------------------------------------------------------------------
# subcommands

def run_sigma(cfg: ExperimentConfig, out: str, jobs: int) -> int:
    if cfg.manifold == "sphere":
        sigma = sphere_sigma(cfg.sphere_config(), k_max=cfg.sigma_k_max)
    else:
        sigma = sigma_for_torus(cfg.torus_config(), k_max=cfg.sigma_k_max,
                                resolution=cfg.sigma_samples)
    rows = [(b.k_abs, b.mu, b.alpha, b.beta) for b in sigma.bands]
    _write_csv(os.path.join(out, "sigma_bands.csv"),
               ["k_abs", "mu", "alpha", "beta"], rows)
    _write_dat(os.path.join(out, "sigma_components.dat"),
               "component_lo component_hi", list(sigma.components))
    _write_summary(os.path.join(out, "sigma_summary.json"), cfg, {
        "lambda0": sigma.lambda0,
        "n_bands": len(sigma.bands),
        "components": [list(c) for c in sigma.components],
        "gaps": [list(g) for g in sigma.gaps],
        "energy_cap": sigma.energy_cap,
    })
    return 0


def run_cluster(cfg: ExperimentConfig, out: str, jobs: int) -> int:
    _require_torus(cfg, "cluster")
    sigma = sigma_for_torus(cfg.torus_config(), k_max=cfg.sigma_k_max,
                            resolution=cfg.sigma_samples)
    window = _resolve_window(cfg, sigma)
    results = _run_per_p("cluster", cfg, window, sigma, jobs)
    rows = [r for res in results for r in res["rows"]]
    _write_csv(os.path.join(out, "cluster.csv"),
               ["p", "index", "eigenvalue", "distance"], rows)
    _write_dat(os.path.join(out, "cluster.dat"), "p max_dist witness",
               [(r["p"], r["max_dist"], r["witness"]) for r in results])
    fit = None
    try:
        pts = [(r["p"], r["max_dist"]) for r in results]
        slope, intercept, r2 = rate_fit(pts)
        fit = {"slope": slope, "intercept": intercept, "r_squared": r2}
    except (InsufficientPoints, LandauSpecError) as exc:
        log.info("rate fit skipped: %s", exc)
    _write_summary(os.path.join(out, "cluster_summary.json"), cfg, {
        "window": list(window),
        "per_p": [{k: r[k] for k in ("p", "N", "count", "max_dist", "witness")}
                  for r in results],
        "fit": fit,
    })
    code = 0
    for r in results:
        if _breach(cfg.thresholds, "witness", r["witness"]):
            code = 2
    if fit is not None and _breach(cfg.thresholds, "slope", fit["slope"]):
        code = 2
    return code


def run_demailly(cfg: ExperimentConfig, out: str, jobs: int) -> int:
    _require_torus(cfg, "demailly")
    sigma = sigma_for_torus(cfg.torus_config(), k_max=cfg.sigma_k_max,
                            resolution=cfg.sigma_samples)
    window = _resolve_window(cfg, sigma)
    results = _run_per_p("demailly", cfg, window, sigma, jobs)
    rows = [r for res in results for r in res["rows"]]
    _write_csv(os.path.join(out, "demailly.csv"),
               ["p", "count", "predicted", "rel_err"], rows)
    _write_dat(os.path.join(out, "demailly.dat"), "p count predicted",
               [(r["p"], r["count"], r["predicted"]) for r in results])
    _write_summary(os.path.join(out, "demailly_summary.json"), cfg, {
        "window": list(window),
        "per_p": [{k: r[k] for k in ("p", "N", "count", "predicted", "rel_err")}
                  for r in results],
    })
    code = 0
    for r in results:
        if _breach(cfg.thresholds, "rel_err", r["rel_err"]):
            code = 2
    return code


def run_kernel(cfg: ExperimentConfig, out: str, jobs: int) -> int:
    _require_torus(cfg, "kernel")
    sigma = sigma_for_torus(cfg.torus_config(), k_max=cfg.sigma_k_max,
                            resolution=cfg.sigma_samples)
    window = _resolve_window(cfg, sigma)
    results = _run_per_p("kernel", cfg, window, sigma, jobs)
    for r in results:
        _write_csv(os.path.join(out, f"kernel_p{r['p']}.csv"),
                   ["p", "i", "j", "re", "im"], r["rows"])
    _write_summary(os.path.join(out, "kernel_summary.json"), cfg, {
        "window": list(window),
        "per_p": [{k: r[k] for k in ("p", "N", "count", "trace", "scaled_diag")}
                  for r in results],
    })
    return 0


def run_decay(cfg: ExperimentConfig, out: str, jobs: int) -> int:
    _require_torus(cfg, "decay")
    sigma = sigma_for_torus(cfg.torus_config(), k_max=cfg.sigma_k_max,
                            resolution=cfg.sigma_samples)
    window = _resolve_window(cfg, sigma)
    results = _run_per_p("decay", cfg, window, sigma, jobs)
    rows = [r for res in results for r in res["rows"]]
    _write_csv(os.path.join(out, "decay.csv"),
               ["p", "c_hat", "C_hat", "r_squared"], rows)
    _write_dat(os.path.join(out, "decay.dat"), "p c_hat r_squared",
               [(r["p"], r["c_hat"], r["r_squared"]) for r in results])
    _write_summary(os.path.join(out, "decay_summary.json"), cfg, {
        "window": list(window),
        "per_p": [{k: r[k] for k in ("p", "N", "c_hat", "C_hat", "r_squared")}
                  for r in results],
    })
    code = 0
    for r in results:
        # fitted log-envelope slope is -c_hat; breach when it fails to be
        # at least as negative as the configured limit
        if _breach(cfg.thresholds, "slope", -r["c_hat"]):
            code = 2
    return code


def run_neardiag(cfg: ExperimentConfig, out: str, jobs: int) -> int:
    _require_torus(cfg, "neardiag")
    sigma = sigma_for_torus(cfg.torus_config(), k_max=cfg.sigma_k_max,
                            resolution=cfg.sigma_samples)
    window = _resolve_window(cfg, sigma)
    results = _run_per_p("neardiag", cfg, window, sigma, jobs)
    rows = [r for res in results for r in res["rows"]]
    _write_csv(os.path.join(out, "neardiag.csv"),
               ["p", "sup_rel_error", "scaled_diag", "w_spacing", "n_pairs"], rows)
    _write_summary(os.path.join(out, "neardiag_summary.json"), cfg, {
        "window": list(window),
        "per_p": [{k: r[k] for k in ("p", "N", "sup_rel_error", "diag_value")}
                  for r in results],
    })
    code = 0
    for r in results:
        if _breach(cfg.thresholds, "rel_err", r["sup_rel_error"]):
            code = 2
    return code


def run_sphere(cfg: ExperimentConfig, out: str, jobs: int) -> int:
    if cfg.manifold != "sphere":
        raise ConfigError("sphere requires manifold = sphere")
    sc = cfg.sphere_config()
    rows = []
    for p in cfg.p_list:
        for k, nu, mult, dist in sphere_exact(sc, p, k_max=cfg.sphere_k_max):
            rows.append((p, k, nu, mult, dist))
    _write_csv(os.path.join(out, "sphere.csv"),
               ["p", "k", "eigenvalue", "multiplicity", "distance"], rows)
    fits = {}
    for k in range(cfg.sphere_k_max + 1):
        pts = [(row[0], row[4]) for row in rows if row[1] == k and row[4] > 0]
        try:
            slope, intercept, r2 = rate_fit(pts)
            fits[str(k)] = {"slope": slope, "intercept": intercept, "r_squared": r2}
        except (InsufficientPoints, LandauSpecError):
            fits[str(k)] = None
    _write_dat(os.path.join(out, "sphere.dat"), "p k distance",
               [(row[0], row[1], row[4]) for row in rows])
    _write_summary(os.path.join(out, "sphere_summary.json"), cfg, {
        "rate_fits": fits,
    })
    code = 0
    for fit in fits.values():
        if fit is not None and _breach(cfg.thresholds, "slope", fit["slope"]):
            code = 2
    return code


def run_export_matrix(cfg: ExperimentConfig, out: str, jobs: int) -> int:
    _require_torus(cfg, "export-matrix")
    for p in cfg.p_list:
        op = assemble(cfg.torus_config(), p, N=cfg.grid_size(p))
        path = os.path.join(out, f"matrix_p{p}.txt")
        nnz = op.export_coordinate_text(path)
        log.info("wrote %s (dim %d, nnz %d)", path, op.dim, nnz)
    return 0


_COMMANDS = {
    "sigma": run_sigma,
    "cluster": run_cluster,
    "demailly": run_demailly,
    "kernel": run_kernel,
    "decay": run_decay,
    "neardiag": run_neardiag,
    "sphere": run_sphere,
    "export-matrix": run_export_matrix,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="landauspec",
        description="Spectral experiments for lattice magnetic Schrodinger "
                    "operators at high tensor power.",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", help="path to a key = value config file")
    parser.add_argument("--jobs", type=int, default=1,
                        help="worker processes for per-p runs (default 1)")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--out", default=None,
                        help="output directory (default: config output.dir)")
    return parser


def main(argv=None) -> int:
    level = os.environ.get("LANDAU_SPEC_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        values = load_config_file(args.config) if args.config else {}
        cfg = resolve_config(values)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=args.seed)
        out = args.out if args.out is not None else cfg.output_dir
        os.makedirs(out, exist_ok=True)
        return _COMMANDS[args.command](cfg, out, args.jobs)
    except LandauSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
