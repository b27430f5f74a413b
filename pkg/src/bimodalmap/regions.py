"""
Closed-form regions and boundary curves of the (b, k) parameter plane.

The bounded-dynamics domain is ``P = {k < b < 0}``. Inside it the fixed point
is stable above the flip curve ``k = b^2/(b+2)`` (which lies in P for
``b < -2``); elsewhere the curves ``b = b1(k)`` (``f(x_max) = x_min``) and
``b = b2(k)`` (``f(x_min) = x_max``) decide which absorbing interval traps
every orbit.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ._config import TOL
from .exceptions import DomainError
from .map_core import MapParams, evaluate, extrema


class RegionTag(str, enum.Enum):
    OutsideP = "OutsideP"
    FixedPointStable = "FixedPointStable"
    MonotoneCore = "MonotoneCore"
    UnimodalLeft = "UnimodalLeft"
    UnimodalRight = "UnimodalRight"
    Bimodal = "Bimodal"


class IntervalKind(str, enum.Enum):
    Jminus = "Jminus"
    Jplus = "Jplus"
    J0 = "J0"
    MonotoneCoreInterval = "MonotoneCoreInterval"


class CurveId(str, enum.Enum):
    Eta1Flip = "Eta1Flip"
    Gamma1 = "Gamma1"
    Gamma2 = "Gamma2"


@dataclass(frozen=True)
class AbsorbingInterval:
    lo: float
    hi: float
    kind: IntervalKind

    def __contains__(self, x):
        return self.lo <= x <= self.hi

    @property
    def width(self):
        return self.hi - self.lo


@dataclass(frozen=True)
class BoundaryCurveSample:
    k: float
    b: float
    curve_id: CurveId


def in_P(p: MapParams) -> bool:
    return p.k < p.b < 0.0


def _fixed_point_stable(b: float, k: float) -> bool:
    # f'(x*) > -1  <=>  k (b + 2) < b^2 ; ties count as stable
    if b >= -2.0:
        return True
    return k >= b * b / (b + 2.0) - TOL.boundary_tie * max(1.0, abs(k))


def flip_curve_k(b: float) -> float:
    """k on the fixed-point flip curve, ``b^2 / (b + 2)``, for ``b < -2``.

    For ``b < -2`` the curve lies inside P (``b^2/(b+2) < b``); for
    ``b > -2`` it gives positive ``k`` and never meets P.
    """
    if not b < -2.0:
        raise DomainError(f"flip curve meets P only for b < -2 (got b={b})")
    return b * b / (b + 2.0)


def gamma_boundaries(k: float) -> tuple[float, float]:
    """``(b1, b2)`` with ``f(x_max) = x_min`` at ``b = b1`` and ``f(x_min) = x_max`` at ``b = b2``."""
    if not k < -4.0:
        raise DomainError(f"gamma curves need k < -4 (got k={k})")
    disc = math.sqrt(4.0 * k + k * k)
    e_min = -1.0 - 0.5 * k + 0.5 * disc
    e_max = 1.0 / e_min  # -1 - k/2 - disc/2, without cancellation
    b1 = 2.0 * math.log(e_min) + 0.5 * k - 0.5 * disc
    b2 = 2.0 * math.log(e_max) + 0.5 * k + 0.5 * disc
    return b1, b2


def gamma_intersection() -> tuple[float, float]:
    """Point ``(b, k)`` where the curves ``b = b1(k)`` and ``b = b2(k)`` cross.

    The involution ``b -> k - b`` swaps the two curves, so the crossing lies
    on ``b = k/2``.
    """
    def gap(k):
        b1, b2 = gamma_boundaries(k)
        return b1 - b2

    k_star = brentq(gap, -40.0, -4.0 - 1e-9, xtol=1e-15, rtol=1e-15)
    return 0.5 * k_star, k_star


def classify(p: MapParams) -> RegionTag:
    """Region of ``p``; parameters on a boundary go to the simpler side."""
    b, k = p.b, p.k
    if not in_P(p):
        return RegionTag.OutsideP
    if _fixed_point_stable(b, k) or k >= -4.0:
        return RegionTag.FixedPointStable
    b1, b2 = gamma_boundaries(k)
    lo, hi = min(b1, b2), max(b1, b2)
    tie = TOL.boundary_tie * max(1.0, abs(b))
    if b2 <= b1:
        # middle band is the monotone core
        if lo - tie <= b <= hi + tie:
            return RegionTag.MonotoneCore
        return RegionTag.UnimodalLeft if b < lo else RegionTag.UnimodalRight
    if b <= lo + tie:
        return RegionTag.UnimodalLeft
    if b >= hi - tie:
        return RegionTag.UnimodalRight
    return RegionTag.Bimodal


def absorbing_interval(p: MapParams) -> AbsorbingInterval:
    """Trapping interval bounded by images of the turning points."""
    tag = classify(p)
    if tag in (RegionTag.OutsideP, RegionTag.FixedPointStable):
        raise DomainError(f"no absorbing interval for region {tag.value} at {p}")
    x_max, x_min = extrema(p.k)
    f_max = float(evaluate(p, x_max))
    f_min = float(evaluate(p, x_min))
    if tag is RegionTag.UnimodalLeft:
        return AbsorbingInterval(float(evaluate(p, f_max)), f_max, IntervalKind.Jminus)
    if tag is RegionTag.UnimodalRight:
        return AbsorbingInterval(f_min, float(evaluate(p, f_min)), IntervalKind.Jplus)
    if tag is RegionTag.Bimodal:
        return AbsorbingInterval(f_min, f_max, IntervalKind.J0)
    return AbsorbingInterval(f_min, f_max, IntervalKind.MonotoneCoreInterval)


def hull_iteration(p: MapParams, start=(-1e3, 1e3), max_iter=100_000):
    """Smallest invariant interval reached by iterating interval hulls.

    Starting from ``start``, replace ``[lo, hi]`` by the exact range of ``f``
    on it (endpoint values plus turning-point values inside) until the
    interval stops changing. Returns ``(lo, hi)`` or ``None`` when the hull
    collapses to the fixed point or fails to settle.
    """
    lo, hi = start
    turning = extrema(p.k) if p.k <= -4.0 else ()
    for _ in range(max_iter):
        cand = [float(evaluate(p, lo)), float(evaluate(p, hi))]
        cand += [float(evaluate(p, c)) for c in turning if lo <= c <= hi]
        new_lo, new_hi = max(min(cand), lo), min(max(cand), hi)
        if new_lo == lo and new_hi == hi:
            return lo, hi
        if new_hi - new_lo < 1e-12:
            return None
        lo, hi = new_lo, new_hi
    return None


def sample_boundary_curves(k_values=None, b_values=None):
    """Points on the flip curve (indexed by ``b_values``) and on both gamma curves."""
    out = []
    for b in np.atleast_1d(b_values if b_values is not None else []):
        out.append(BoundaryCurveSample(flip_curve_k(float(b)), float(b), CurveId.Eta1Flip))
    for k in np.atleast_1d(k_values if k_values is not None else []):
        b1, b2 = gamma_boundaries(float(k))
        out.append(BoundaryCurveSample(float(k), b1, CurveId.Gamma1))
        out.append(BoundaryCurveSample(float(k), b2, CurveId.Gamma2))
    return out
