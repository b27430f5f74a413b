"""
Two-predators-one-prey system and its Poincare return map.

    y_i' = m_i (s - lambda_i) / (s + a_i) * y_i        (i = 1, 2)
    s'   = (1 - s - y_1/(s + a_1) - y_2/(s + a_2)) * s

Sections are taken at ``s = s_level`` with ``s' < 0`` and recorded as
``x = ln(y_2 / y_1)``. Nothing here ties ODE parameters to a particular
``(b, k)``; the return-map cloud is for qualitative comparison only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .exceptions import NoCrossings, StepUnderflow
from .map_core import MapParams

MIN_STEP = 1e-14
MAX_STEP = 1.0
NEG_CLIP = 1e-12
SUBSTEPS = 8
LOCAL_FACTOR = 0.1


@dataclass(frozen=True)
class OdeParams:
    m1: float
    m2: float
    lambda1: float
    lambda2: float
    a1: float
    a2: float

    def __post_init__(self):
        for name in ("m1", "m2", "lambda1", "lambda2", "a1", "a2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v}")

    def swapped(self) -> "OdeParams":
        """Relabel predators 1 <-> 2."""
        return OdeParams(self.m2, self.m1, self.lambda2, self.lambda1, self.a2, self.a1)

    @property
    def default_section(self):
        return 0.5 * (self.lambda1 + self.lambda2)


@dataclass(frozen=True)
class OdeState:
    y1: float
    y2: float
    s: float

    def __post_init__(self):
        if min(self.y1, self.y2, self.s) < 0:
            raise ValueError(f"state must be non-negative, got {self}")

    def as_array(self):
        return np.array([self.y1, self.y2, self.s], dtype=float)

    def swapped(self) -> "OdeState":
        return OdeState(self.y2, self.y1, self.s)


@dataclass(frozen=True)
class SectionEvent:
    t: float
    x: float
    state: OdeState


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray        # shape (n, 3): columns y1, y2, s
    sol: object          # dense interpolant, callable on t
    params: OdeParams


def vector_field(p: OdeParams, st: OdeState):
    """Rates ``(dy1, dy2, ds)`` at ``st``."""
    return _rates(p, st.y1, st.y2, st.s)


def _rates(p: OdeParams, y1, y2, s):
    dy1 = p.m1 * (s - p.lambda1) / (s + p.a1) * y1
    dy2 = p.m2 * (s - p.lambda2) / (s + p.a2) * y2
    ds = (1.0 - s - y1 / (s + p.a1) - y2 / (s + p.a2)) * s
    return dy1, dy2, ds


def _clip(y):
    y = np.array(y, dtype=float)
    y[(y < 0) & (y > -NEG_CLIP)] = 0.0
    return y


def integrate(p: OdeParams, st0: OdeState, t_end: float, tol: float = 1e-9,
              t_start: float = 0.0) -> Trajectory:
    """Adaptive Dormand-Prince 5(4) integration from ``t_start`` to ``t_end``.

    Each step is accepted at relative error ``0.1 * tol``.

    Raises
    ------
    StepUnderflow
        When the solver cannot proceed with a step above 1e-14.
    """
    if not 1e-12 <= tol <= 1e-4:
        raise ValueError(f"tol must lie in [1e-12, 1e-4], got {tol}")

    def rhs(t, z):
        return _rates(p, z[0], z[1], z[2])

    # local error control one decade below tol leaves room for accumulation
    rtol = max(tol * LOCAL_FACTOR, 1e-13)
    res = solve_ivp(rhs, (t_start, t_end), st0.as_array(), method="RK45", rtol=rtol,
                    atol=rtol * 1e-3, max_step=MAX_STEP, first_step=None, dense_output=True)
    if res.status == -1:
        raise StepUnderflow(res.message)
    steps = np.diff(res.t)
    if steps.size and steps.min() < MIN_STEP:
        raise StepUnderflow(f"step {steps.min():.3g} below {MIN_STEP}")
    y = _clip(res.y.T)
    return Trajectory(res.t, y, res.sol, p)


def section_events(traj: Trajectory, s_level: float, time_tol: float = 1e-10,
                   substeps: int = SUBSTEPS) -> List[SectionEvent]:
    """Downward crossings of ``s = s_level``, each located by bisection on the dense output.

    Each solver step is resampled at ``substeps`` points so that brief dips
    below the level inside one step are not missed.
    """
    frac = np.linspace(0.0, 1.0, substeps + 1)[:-1]
    tt = (traj.t[:-1, None] + np.diff(traj.t)[:, None] * frac).ravel()
    tt = np.append(tt, traj.t[-1])
    s = traj.sol(tt)[2] - s_level
    idx = np.flatnonzero((s[:-1] > 0) & (s[1:] <= 0))
    events = []
    for i in idx:
        lo, hi = tt[i], tt[i + 1]
        while hi - lo > time_tol:
            mid = 0.5 * (lo + hi)
            if traj.sol(mid)[2] - s_level > 0:
                lo = mid
            else:
                hi = mid
        t_ev = 0.5 * (lo + hi)
        y1, y2, s_ev = _clip(traj.sol(t_ev))
        if _rates(traj.params, y1, y2, s_ev)[2] >= 0:
            continue
        x = math.log(y2 / y1) if y1 > 0 and y2 > 0 else (math.inf if y1 == 0 else -math.inf)
        events.append(SectionEvent(float(t_ev), x, OdeState(float(y1), float(y2), float(s_ev))))
    return events


def poincare_section(p: OdeParams, st0: OdeState, n_events: int, s_level: Optional[float] = None,
                     tol: float = 1e-9, chunk: float = 200.0, t_max: float = 1e5) -> List[SectionEvent]:
    """First ``n_events`` downward crossings of ``s = s_level`` starting from ``st0``."""
    if s_level is None:
        s_level = p.default_section
    if not s_level > 0:
        raise ValueError("s_level must be positive")
    events: List[SectionEvent] = []
    t, st = 0.0, st0
    while len(events) < n_events and t < t_max:
        traj = integrate(p, st, t + chunk, tol, t_start=t)
        events.extend(section_events(traj, s_level))
        t = float(traj.t[-1])
        st = OdeState(*(float(v) for v in traj.y[-1]))
    if not events:
        raise NoCrossings(f"no downward crossing of s={s_level} before t={t_max}")
    return events[:n_events]


def return_map_cloud(p: OdeParams, st0: OdeState, n_events: int, s_level: Optional[float] = None,
                     tol: float = 1e-9, skip: int = 0) -> np.ndarray:
    """Consecutive section pairs ``(x_j, x_{j+1})`` as an (n-1, 2) array."""
    if n_events < 2:
        raise ValueError("n_events must be at least 2")
    ev = poincare_section(p, st0, n_events + skip, s_level, tol)[skip:]
    x = np.array([e.x for e in ev])
    return np.column_stack([x[:-1], x[1:]])


def cloud_thickness(cloud: np.ndarray, n_bins: int = 40) -> float:
    """Largest spread of ``x_{j+1}`` about its bin median, over bins of ``x_j``.

    Zero for a cloud lying on a single-valued curve resolved by the bins.
    """
    x, y = cloud[:, 0], cloud[:, 1]
    if np.ptp(x) == 0:
        return float(np.max(np.abs(y - np.median(y))))
    edges = np.linspace(x.min(), x.max(), n_bins + 1)
    which = np.clip(np.digitize(x, edges) - 1, 0, n_bins - 1)
    spread = 0.0
    for b in np.unique(which):
        ys = y[which == b]
        spread = max(spread, float(np.max(np.abs(ys - np.median(ys)))))
    return spread


def reduced_map_params(beta: float, u: float, k1: float, k2: float) -> MapParams:
    """``(b, k)`` such that ``beta + x - u (k1 + k2 e^x)/(1 + e^x) = b + x - k/(1 + e^x)``.

    Uses ``(k1 + k2 e^x)/(1 + e^x) = k2 + (k1 - k2)/(1 + e^x)``.
    """
    return MapParams(beta - k2 * u, (k1 - k2) * u)


def four_parameter_map(beta: float, u: float, k1: float, k2: float, x):
    x = np.asarray(x, dtype=float)
    return (beta + x - u * (k1 + k2 * np.exp(x)) / (1.0 + np.exp(x)))[()]
