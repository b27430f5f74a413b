"""
Numerical laboratory for the bimodal map ``f(x) = b + x - k / (1 + e^x)``.

The map arises as a Poincare return map of a two-predators-one-prey model
and is studied on ``P = {k < b < 0}``.
"""
from ._config import TOL, Tolerances
from .continuation import (BifurcationCurve, BifurcationKind, BifurcationPoint, continue_curve,
                           crisis_boundary_scan, intersect_curves, locate_cycle_bifurcation,
                           seed_from_cycle)
from .estimators import AttractorScanner, RegionClassifier
from .exceptions import (BimodalMapError, BracketError, ConfigError, CriticalPointError,
                         DomainError, NoConvergence, NoCrossings, NoFixedPoint, NotInRegion,
                         SingularJacobian, StepUnderflow, UnresolvedAttractor)
from .map_core import (CriticalStructure, MapParams, critical_points, derivative, evaluate,
                       extrema, fixed_point_multiplier, schwarzian, symmetry_conjugate)
from .ode import (OdeParams, OdeState, SectionEvent, integrate, poincare_section,
                  reduced_map_params, return_map_cloud, vector_field)
from .orbits import (Attractor, AttractorKind, AttractorSet, Period2Orbit, attractor_set,
                     basin_labels, find_period2, iterate, k_of_u, period2_uniqueness_check)
from .regions import (AbsorbingInterval, CurveId, IntervalKind, RegionTag, absorbing_interval,
                      classify, flip_curve_k, gamma_boundaries, gamma_intersection, in_P)
from .scan import CellSummary, ScanGrid, scan, sweep

__version__ = "0.1.0"
