"""Numerical tolerances and defaults, kept in one place."""
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # map_core
    eps_deriv: float = 1e-12
    eps_xcheck: float = 1e-8
    critical_guard: float = 1e-10
    # regions
    boundary_tie: float = 1e-14
    # orbits
    p_max: int = 512
    n_transient: int = 100_000
    n_sample: int = 1024
    period_rtol: float = 1e-8
    cycle_residual: float = 1e-9
    chaos_lyapunov: float = 1e-3
    merge_hausdorff: float = 1e-6
    escape_bound: float = 1e6
    iteration_cap: int = 10_000_000
    x_big: float = 1e4
    # continuation
    newton_maxiter: int = 50
    newton_tol: float = 1e-10
    singular_det: float = 1e-14


TOL = Tolerances()
