"""Spectral clustering of lattice magnetic Schrodinger operators at high
tensor power: band sets from the local model, certified window
eigensolves, counting-law comparisons, and projector-kernel asymptotics.
"""
from .errors import (
    ConfigError,
    DegenerateField,
    EmptyPrediction,
    EmptyWindow,
    EnergyCapExceeded,
    FluxAliased,
    InsufficientPoints,
    InsufficientRange,
    LandauSpecError,
    NoConvergence,
    NonPositiveFlux,
    NonUnitaryPhases,
    NotQuantized,
    ShiftSingular,
    WindowBandMismatch,
    WindowBoundaryHit,
)
from .model import (
    Band,
    FieldSample,
    SigmaSet,
    bergman_kernel,
    frequencies,
    landau_level_kernel,
    landau_levels,
    model_counting,
    sigma_bands,
)
from .geometry import (
    SphereConfig,
    TorusConfig,
    quantization_check,
    sphere_field_sample,
    sphere_liouville_measure,
    torus_field_samples,
    torus_grid,
    torus_liouville_measure,
)
from .lattice import (
    LatticeOperator,
    LinkField,
    assemble,
    default_grid_size,
    gauge_transform,
    link_field,
    plaquette_fluxes,
)
from .eigensolve import EigenWindow, count_in, eigs_window
from .analysis import (
    ClusterReport,
    band_window,
    demailly_compare,
    distance_to_sigma,
    rate_fit,
    sigma_for_torus,
    sphere_exact,
    sphere_sigma,
)
from .kernels import (
    KernelGrid,
    NearDiagonalReport,
    ball_nodes,
    decay_fit,
    near_diagonal_compare,
    projector_kernel,
)
from .stencil import BACKEND as STENCIL_BACKEND

__version__ = "0.1.0"

__all__ = [
    "Band",
    "ClusterReport",
    "ConfigError",
    "DegenerateField",
    "EigenWindow",
    "EmptyPrediction",
    "EmptyWindow",
    "EnergyCapExceeded",
    "FieldSample",
    "FluxAliased",
    "InsufficientPoints",
    "InsufficientRange",
    "KernelGrid",
    "LandauSpecError",
    "LatticeOperator",
    "LinkField",
    "NearDiagonalReport",
    "NoConvergence",
    "NonPositiveFlux",
    "NonUnitaryPhases",
    "NotQuantized",
    "STENCIL_BACKEND",
    "ShiftSingular",
    "SigmaSet",
    "SphereConfig",
    "TorusConfig",
    "WindowBandMismatch",
    "WindowBoundaryHit",
    "assemble",
    "ball_nodes",
    "band_window",
    "bergman_kernel",
    "count_in",
    "decay_fit",
    "default_grid_size",
    "demailly_compare",
    "distance_to_sigma",
    "eigs_window",
    "frequencies",
    "gauge_transform",
    "landau_level_kernel",
    "landau_levels",
    "link_field",
    "model_counting",
    "near_diagonal_compare",
    "plaquette_fluxes",
    "projector_kernel",
    "quantization_check",
    "rate_fit",
    "sigma_bands",
    "sigma_for_torus",
    "sphere_exact",
    "sphere_field_sample",
    "sphere_liouville_measure",
    "sphere_sigma",
    "torus_field_samples",
    "torus_grid",
    "torus_liouville_measure",
]
