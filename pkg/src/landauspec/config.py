"""Flat dotted-key experiment configuration.

Files hold one `key = value` pair per line; `#` starts a comment.  Keys are
dotted paths (e.g. ``field.epsilon = 0.1``).  Unknown keys are hard errors
with the offending line number, so typos cannot silently fall back to
defaults.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from .errors import ConfigError
from .geometry import PROFILES, SphereConfig, TorusConfig

_BOOL = {"true": True, "false": False, "yes": True, "no": False}


def _parse_scalar(text: str):
    t = text.strip()
    if t.lower() in _BOOL:
        return _BOOL[t.lower()]
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        pass
    if len(t) >= 2 and t[0] == t[-1] and t[0] in "\"'":
        return t[1:-1]
    return t


def _parse_list(text: str):
    return [_parse_scalar(tok) for tok in text.split(",") if tok.strip()]


# key -> (kind, default); kind in {int, float, str, bool, int_list, str_or_int}
SCHEMA = {
    "manifold": ("str", "torus"),
    "field.m": ("int", 1),
    "field.epsilon": ("float", 0.0),
    "field.profile": ("str", "cos_x"),
    "field.R_squared": ("float", 1.0),
    "potential": ("str", "zero"),
    "potential.file": ("str", ""),
    "p_list": ("int_list", [4, 8, 16]),
    "grid.N": ("str_or_int", "auto"),
    "window.lo": ("float", None),
    "window.hi": ("float", None),
    "window.band": ("int", None),
    "tol.eigensolver": ("float", None),
    "tol.quadrature": ("float", 1e-8),
    "seed": ("int", 0),
    "output.dir": ("str", "."),
    "sigma.k_max": ("int", 8),
    "sigma.energy_cap_factor": ("float", 5.0),
    "sigma.samples": ("int", 64),
    "quad.resolution": ("int", 256),
    "kernel.w_max": ("float", 4.0),
    "kernel.base_x": ("int", None),
    "kernel.base_y": ("int", None),
    "kernel.mode": ("str", "modulus"),
    "decay.s_max": ("float", 3.0),
    "sphere.k_max": ("int", 3),
    "thresholds.rel_err": ("float", None),
    "thresholds.slope": ("float", None),
    "thresholds.witness": ("float", None),
}


def _coerce(key: str, value, kind: str, lineno: int):
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"line {lineno}: {key} expects an integer, got {value!r}")
        return value
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"line {lineno}: {key} expects a number, got {value!r}")
        return float(value)
    if kind == "str":
        if not isinstance(value, str):
            raise ConfigError(f"line {lineno}: {key} expects a string, got {value!r}")
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"line {lineno}: {key} expects true/false, got {value!r}")
        return value
    if kind == "int_list":
        vals = value if isinstance(value, list) else [value]
        out = []
        for v in vals:
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(
                    f"line {lineno}: {key} expects a comma-separated integer list"
                )
            out.append(v)
        return out
    if kind == "str_or_int":
        if isinstance(value, bool) or not isinstance(value, (int, str)):
            raise ConfigError(f"line {lineno}: {key} expects 'auto' or an integer")
        return value
    raise AssertionError(kind)


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse `key = value` lines into a {key: value} dict against SCHEMA."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, rhs = line.partition("=")
        key = key.strip()
        if key not in SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown config key {key!r}")
        kind, _default = SCHEMA[key]
        parsed = _parse_list(rhs) if kind == "int_list" else _parse_scalar(rhs)
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = _coerce(key, parsed, kind, lineno)
    return values


def load_config_file(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), source=path)


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved experiment settings (schema defaults filled in)."""

    manifold: str = "torus"
    flux_m: int = 1
    epsilon: float = 0.0
    profile: str = "cos_x"
    R_squared: float = 1.0
    potential: str = "zero"
    potential_file: str = ""
    p_list: tuple = (4, 8, 16)
    grid_N: object = "auto"
    window_lo: Optional[float] = None
    window_hi: Optional[float] = None
    window_band: Optional[int] = None
    tol_eigensolver: Optional[float] = None
    tol_quadrature: float = 1e-8
    seed: int = 0
    output_dir: str = "."
    sigma_k_max: int = 8
    sigma_energy_cap_factor: float = 5.0
    sigma_samples: int = 64
    quad_resolution: int = 256
    kernel_w_max: float = 4.0
    kernel_base: Optional[tuple] = None
    kernel_mode: str = "modulus"
    decay_s_max: float = 3.0
    sphere_k_max: int = 3
    thresholds: dict = field(default_factory=dict)

    def torus_config(self) -> TorusConfig:
        potential_values = None
        if self.potential == "custom":
            if not self.potential_file:
                raise ConfigError("potential = custom requires potential.file")
            import numpy as np

            potential_values = np.loadtxt(self.potential_file)
        return TorusConfig(
            flux_m=self.flux_m,
            epsilon=self.epsilon,
            profile=self.profile,
            potential=self.potential,
            potential_values=potential_values,
        )

    def sphere_config(self) -> SphereConfig:
        return SphereConfig(R_squared=self.R_squared)

    def grid_size(self, p: int) -> Optional[int]:
        if self.grid_N == "auto":
            return None
        return int(self.grid_N)


def resolve_config(values: dict) -> ExperimentConfig:
    """Fill defaults and cross-validate a parsed key/value mapping."""
    full = {k: v for k, (_kind, v) in SCHEMA.items()}
    full.update(values)
    manifold = full["manifold"]
    if manifold not in ("torus", "sphere"):
        raise ConfigError(f"manifold must be 'torus' or 'sphere', got {manifold!r}")
    profile = full["field.profile"]
    if profile not in PROFILES:
        raise ConfigError(
            f"field.profile must be one of {sorted(PROFILES)}, got {profile!r}"
        )
    potential = full["potential"]
    if potential not in ("zero", "renormalized", "custom"):
        raise ConfigError(f"unknown potential {potential!r}")
    if not (0.0 <= full["field.epsilon"] < 1.0):
        raise ConfigError("field.epsilon must lie in [0, 1)")
    p_list = tuple(full["p_list"])
    if not p_list or any(p <= 0 for p in p_list):
        raise ConfigError("p_list must hold positive integers")
    grid_N = full["grid.N"]
    if isinstance(grid_N, str) and grid_N != "auto":
        raise ConfigError(f"grid.N must be 'auto' or an integer, got {grid_N!r}")
    lo, hi = full["window.lo"], full["window.hi"]
    if (lo is None) != (hi is None):
        raise ConfigError("window.lo and window.hi must be given together")
    if lo is not None and not lo < hi:
        raise ConfigError(f"window.lo must be < window.hi, got [{lo}, {hi}]")
    if lo is not None and full["window.band"] is not None:
        raise ConfigError("give either window.lo/hi or window.band, not both")
    mode = full["kernel.mode"]
    if mode not in ("modulus", "phase_corrected"):
        raise ConfigError(f"kernel.mode must be modulus|phase_corrected, got {mode!r}")
    bx, by = full["kernel.base_x"], full["kernel.base_y"]
    if (bx is None) != (by is None):
        raise ConfigError("kernel.base_x and kernel.base_y must be given together")
    thresholds = {
        name: full[f"thresholds.{name}"]
        for name in ("rel_err", "slope", "witness")
        if full[f"thresholds.{name}"] is not None
    }
    return ExperimentConfig(
        manifold=manifold,
        flux_m=full["field.m"],
        epsilon=full["field.epsilon"],
        profile=profile,
        R_squared=full["field.R_squared"],
        potential=potential,
        potential_file=full["potential.file"],
        p_list=p_list,
        grid_N=grid_N,
        window_lo=lo,
        window_hi=hi,
        window_band=full["window.band"],
        tol_eigensolver=full["tol.eigensolver"],
        tol_quadrature=full["tol.quadrature"],
        seed=full["seed"],
        output_dir=full["output.dir"],
        sigma_k_max=full["sigma.k_max"],
        sigma_energy_cap_factor=full["sigma.energy_cap_factor"],
        sigma_samples=full["sigma.samples"],
        quad_resolution=full["quad.resolution"],
        kernel_w_max=full["kernel.w_max"],
        kernel_base=None if bx is None else (bx, by),
        kernel_mode=mode,
        decay_s_max=full["decay.s_max"],
        sphere_k_max=full["sphere.k_max"],
        thresholds=thresholds,
    )


def load_experiment(path: Optional[str], overrides: Optional[dict] = None) -> ExperimentConfig:
    values = load_config_file(path) if path else {}
    if overrides:
        for key in overrides:
            if key not in SCHEMA:
                raise ConfigError(f"unknown config key {key!r}")
        values.update(overrides)
    return resolve_config(values)


def with_seed(cfg: ExperimentConfig, seed: int) -> ExperimentConfig:
    return replace(cfg, seed=seed)
