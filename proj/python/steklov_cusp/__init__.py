"""Steklov p-Laplacian eigenvalues on a cusp domain."""

from ._core import (
    ConfigError,
    DomainError,
    DomainSpec,
    EigenResult,
    Error,
    FpResult,
    GeometryError,
    Mesh,
    MeshError,
    SolverError,
    SweepRow,
    alpha_sweep,
    build_mesh,
    classify_trend,
    cusp_cap_intersection,
    energy,
    energy_gradient,
    fp_constant,
    rayleigh,
    run_command,
    run_validation,
    solve_p,
    solve_p2,
    trace_spectrum,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DomainError",
    "DomainSpec",
    "EigenResult",
    "Error",
    "FpResult",
    "GeometryError",
    "Mesh",
    "MeshError",
    "SolverError",
    "SweepRow",
    "alpha_sweep",
    "build_mesh",
    "classify_trend",
    "cusp_cap_intersection",
    "energy",
    "energy_gradient",
    "fp_constant",
    "rayleigh",
    "run_command",
    "run_validation",
    "solve_p",
    "solve_p2",
    "trace_spectrum",
]
