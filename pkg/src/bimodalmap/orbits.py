"""
Orbit iteration, attractor classification and the period-2 machinery.

Every attractor of the map attracts one of the two turning points, so the
attractors are found by following the orbits of ``x_max`` and ``x_min``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from . import _kernels
from ._config import TOL
from .exceptions import BracketError, DomainError, NotInRegion, UnresolvedAttractor
from .map_core import MapParams, critical_points, evaluate, extrema
from .regions import RegionTag, absorbing_interval, classify, in_P


class AttractorKind(str, enum.Enum):
    FixedPoint = "FixedPoint"
    Cycle = "Cycle"
    Chaotic = "Chaotic"
    Divergent = "Divergent"


@dataclass
class OrbitResult:
    seed: float
    tail: np.ndarray
    escaped: bool


@dataclass(eq=False)
class Attractor:
    """Classified limit set of one orbit.

    ``points`` holds the sorted cycle for periodic attractors and the sorted
    band endpoints for chaotic ones. ``period`` is 0 for chaotic and
    divergent orbits.
    """

    kind: AttractorKind
    period: int
    points: np.ndarray
    lyapunov: float
    bands: list = field(default_factory=list)
    tail: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def is_periodic(self):
        return self.kind in (AttractorKind.FixedPoint, AttractorKind.Cycle)

    @property
    def label(self):
        """Period as an int, or ``"chaotic"``."""
        return self.period if self.is_periodic else self.kind.value.lower()


@dataclass
class AttractorSet:
    attractors: List[Attractor]
    bistable: bool
    seed_tags: List[str] = field(default_factory=list)

    @property
    def periods(self):
        return sorted(a.period for a in self.attractors)


@dataclass(frozen=True)
class Period2Orbit:
    x1: float
    x2: float
    u1: float
    u2: float
    B: float
    k_reconstructed: float


# -- iteration -----------------------------------------------------------------

def iterate(p: MapParams, x0: float, n_transient: int = TOL.n_transient,
            n_sample: int = TOL.n_sample) -> OrbitResult:
    """Discard ``n_transient`` iterates of ``x0`` and record the next ``n_sample``.

    Iteration stops early, with ``escaped=True``, once an iterate leaves
    ``[-1e6, 1e6]``.
    """
    if n_transient < 0 or n_sample < 0:
        raise ValueError("iteration counts must be non-negative")
    if n_transient + n_sample > TOL.iteration_cap:
        raise ValueError(f"at most {TOL.iteration_cap} iterations per orbit")
    tail, _, escaped = _kernels.iterate_tail(float(p.b), float(p.k), float(x0),
                                             int(n_transient), int(n_sample), TOL.escape_bound)
    return OrbitResult(seed=float(x0), tail=tail, escaped=bool(escaped))


def orbit_points(p: MapParams, x0: float, n: int) -> np.ndarray:
    """``[x0, f(x0), ..., f^{n-1}(x0)]``."""
    out = np.empty(n)
    x = float(x0)
    for i in range(n):
        out[i] = x
        x = _kernels.step(p.b, p.k, x)
    return out


def cycle_residual(p: MapParams, x: float, n: int) -> float:
    y = float(x)
    for _ in range(n):
        y = _kernels.step(p.b, p.k, y)
    return abs(y - x)


def _polish_cycle(p: MapParams, x: float, n: int, maxiter: int = 30) -> float:
    """Newton on ``f^n(x) - x``; returns the best point found."""
    best, best_res = x, cycle_residual(p, x, n)
    for _ in range(maxiter):
        if best_res < 1e-13:
            break
        y, d = x, 1.0
        for _ in range(n):
            d *= _kernels.slope(p.k, y)
            y = _kernels.step(p.b, p.k, y)
        g, dg = y - x, d - 1.0
        if dg == 0.0 or not math.isfinite(dg):
            break
        x = x - g / dg
        res = cycle_residual(p, x, n)
        if not math.isfinite(res):
            break
        if res < best_res:
            best, best_res = x, res
        elif res > 10 * best_res:
            break
    return best


# -- set comparison ------------------------------------------------------------

def nearest_distances(a, b) -> np.ndarray:
    """Distance from each point of ``a`` to the nearest point of ``b``."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.sort(np.asarray(b, dtype=float).ravel())
    idx = np.clip(np.searchsorted(b, a), 1, len(b) - 1) if len(b) > 1 else np.zeros(len(a), int)
    if len(b) == 1:
        return np.abs(a - b[0])
    return np.minimum(np.abs(a - b[idx - 1]), np.abs(a - b[idx]))


def hausdorff(a, b) -> float:
    if len(a) == 0 or len(b) == 0:
        return math.inf
    return float(max(nearest_distances(a, b).max(), nearest_distances(b, a).max()))


def band_summary(tail, gap_factor: float = 16.0):
    """Split a chaotic tail into bands at gaps wider than ``gap_factor`` mean spacings."""
    xs = np.sort(np.asarray(tail, dtype=float))
    if len(xs) < 2:
        return [(float(xs[0]), float(xs[0]))] if len(xs) else []
    gaps = np.diff(xs)
    mean_gap = (xs[-1] - xs[0]) / (len(xs) - 1)
    cuts = np.flatnonzero(gaps > gap_factor * mean_gap)
    starts = np.concatenate(([0], cuts + 1))
    ends = np.concatenate((cuts, [len(xs) - 1]))
    return [(float(xs[s]), float(xs[e])) for s, e in zip(starts, ends)]


def _cloud_scale(a, b):
    lo = min(np.min(a), np.min(b))
    hi = max(np.max(a), np.max(b))
    return (hi - lo) / min(len(a), len(b))


def same_cloud(a, b, factor: float = 8.0) -> bool:
    """Whether two sampled point clouds cover the same set.

    Both median nearest-neighbour distances must be within ``factor`` times
    the mean sample spacing of the pooled clouds.
    """
    tol = factor * _cloud_scale(a, b)
    return (np.median(nearest_distances(a, b)) <= tol
            and np.median(nearest_distances(b, a)) <= tol)


def same_attractor(a: Attractor, b: Attractor, tol: float = TOL.merge_hausdorff) -> bool:
    if a.is_periodic and b.is_periodic:
        return a.period == b.period and hausdorff(a.points, b.points) < tol
    if a.kind is AttractorKind.Chaotic and b.kind is AttractorKind.Chaotic:
        return same_cloud(a.tail, b.tail)
    return False


# -- classification ------------------------------------------------------------

def classify_orbit(tail, p: MapParams, p_max: int = TOL.p_max) -> Attractor:
    """Classify a bounded orbit tail as fixed point, cycle or chaotic band set.

    Raises
    ------
    UnresolvedAttractor
        When no period up to ``p_max`` fits and the Lyapunov estimate does
        not exceed 1e-3.
    """
    tail = np.ascontiguousarray(tail, dtype=float)
    if tail.size == 0:
        raise ValueError("empty tail")
    if not np.all(np.isfinite(tail)):
        raise ValueError("tail contains non-finite values")
    diam = float(np.ptp(tail))
    atol = TOL.period_rtol * max(diam, 1.0)
    per = int(_kernels.min_period(tail, atol, p_max))
    if per:
        x = _polish_cycle(p, float(tail[-1]), per)
        pts = orbit_points(p, x, per)
        lyap = float(_kernels.lyapunov(p.k, pts))
        if not lyap < 0.0:
            raise UnresolvedAttractor(f"period-{per} orbit is not attracting (lyapunov={lyap:.3g})", lyap)
        kind = AttractorKind.FixedPoint if per == 1 else AttractorKind.Cycle
        return Attractor(kind, per, np.sort(pts), lyap, tail=tail)
    lyap = float(_kernels.lyapunov(p.k, tail))
    if lyap > TOL.chaos_lyapunov:
        bands = band_summary(tail)
        pts = np.array([e for band in bands for e in band])
        return Attractor(AttractorKind.Chaotic, 0, pts, lyap, bands=bands, tail=tail)
    raise UnresolvedAttractor(f"no period <= {p_max} and lyapunov={lyap:.3g}", lyap)


def _require_bimodal_domain(p: MapParams):
    if not in_P(p) or p.k >= -4.0:
        raise NotInRegion(f"need k < b < 0 and k < -4, got b={p.b}, k={p.k}")


def critical_seeds(p: MapParams):
    x_max, x_min = extrema(p.k)
    return {"max": x_max, "min": x_min}


def seed_attractor(p: MapParams, x0: float, n_transient=TOL.n_transient,
                   n_sample=TOL.n_sample, p_max=TOL.p_max) -> Attractor:
    orbit = iterate(p, x0, n_transient, n_sample)
    if orbit.escaped:
        return Attractor(AttractorKind.Divergent, 0, np.empty(0), math.nan, tail=orbit.tail)
    return classify_orbit(orbit.tail, p, p_max)


def merge_attractors(found: dict) -> AttractorSet:
    """Merge per-seed attractors ``{"max": a, "min": b}`` into an AttractorSet."""
    a_max, a_min = found["max"], found["min"]
    if same_attractor(a_max, a_min):
        return AttractorSet([a_max], False, ["both"])
    return AttractorSet([a_max, a_min], True, ["max", "min"])


def attractor_set(p: MapParams, n_transient=TOL.n_transient, n_sample=TOL.n_sample,
                  p_max=TOL.p_max) -> AttractorSet:
    """Attractors reached from the two turning points; at most two exist."""
    _require_bimodal_domain(p)
    found = {tag: seed_attractor(p, x0, n_transient, n_sample, p_max)
             for tag, x0 in critical_seeds(p).items()}
    return merge_attractors(found)


def basin_labels(p: MapParams, seeds, aset: AttractorSet, n_transient=20_000,
                 chunk=1_000, n_probe=256) -> np.ndarray:
    """Index into ``aset.attractors`` reached by each seed (-1: none, -2: escaped).

    Seeds are advanced in chunks and compared after each chunk, so quickly
    converging seeds stop early.
    """
    seeds = np.asarray(seeds, dtype=float)
    labels = np.full(len(seeds), -1, dtype=int)
    for j, x in enumerate(seeds):
        done = 0
        while done < n_transient:
            x = float(_kernels.iterate_many(p.b, p.k, np.array([x]), chunk, TOL.escape_bound)[0])
            done += chunk
            if not math.isfinite(x):
                labels[j] = -2
                break
            probe = orbit_points(p, x, n_probe)
            hit = _match(probe, aset)
            if hit >= 0:
                labels[j] = hit
                break
    return labels


def _match(probe, aset: AttractorSet, tol=1e-5) -> int:
    for i, a in enumerate(aset.attractors):
        if a.is_periodic:
            if nearest_distances(probe, a.points).max() < tol:
                return i
        elif a.kind is AttractorKind.Chaotic:
            if same_cloud(probe, a.tail):
                return i
    return -1


# -- period two ----------------------------------------------------------------

def _require_unstable_fixed_point(p: MapParams):
    tag = classify(p)
    if tag in (RegionTag.OutsideP, RegionTag.FixedPointStable):
        raise NotInRegion(f"need (b,k) in P with unstable fixed point, got {tag.value} at {p}")


def _g2(p: MapParams, x):
    return evaluate(p, evaluate(p, x)) - x


def period2_from_points(x1: float, x2: float) -> Period2Orbit:
    """Coordinates ``u_i = 1/(1+e^{x_i})`` of a 2-cycle and the ``(B, k)`` they determine."""
    x1, x2 = min(x1, x2), max(x1, x2)
    u1, u2 = float(expit(-x1)), float(expit(-x2))
    return Period2Orbit(x1, x2, u1, u2, u1 + u2, 2.0 * (x2 - x1) / (u2 - u1))


def find_period2(p: MapParams) -> Period2Orbit:
    """The unique 2-cycle: a root of ``f^2(x) - x`` left of the fixed point, and its image."""
    _require_unstable_fixed_point(p)
    x_star = critical_points(p).x_star
    lo = -TOL.x_big
    if not _g2(p, lo) > 0.0:
        raise BracketError(f"f^2(x)-x not positive at x={lo}")
    eps = 1.0
    while eps > 1e-13 and not _g2(p, x_star - eps) < 0.0:
        eps *= 0.5
    if not _g2(p, x_star - eps) < 0.0:
        raise BracketError("no sign change left of the fixed point")
    x1 = brentq(lambda x: _g2(p, x), lo, x_star - eps, xtol=1e-15, rtol=1e-15, maxiter=500)
    x2 = float(evaluate(p, x1))
    return period2_from_points(x1, x2)


def sign_changes(values) -> int:
    s = np.sign(values)
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def period2_uniqueness_check(p: MapParams, n_mesh: int = 200_001) -> int:
    """Number of period-2 points found by a sign-change scan (excluding x*)."""
    _require_unstable_fixed_point(p)
    J = absorbing_interval(p)
    pad = 0.2 * J.width
    xs = np.linspace(J.lo - pad, J.hi + pad, n_mesh)
    return sign_changes(_g2(p, xs)) - 1


def k_of_u(B: float, u: float) -> float:
    """Depth ``k`` of the map whose 2-cycle has ``u_1 = u`` and ``u_1 + u_2 = B``."""
    if not 0.0 < B < 2.0:
        raise DomainError(f"B must lie in (0, 2), got {B}")
    if not B / 2.0 < u < min(B, 1.0):
        raise DomainError(f"u must lie in ({B / 2}, {min(B, 1.0)}), got {u}")

    def h(v):
        return math.log(1.0 / v - 1.0)

    return 2.0 * (h(u) - h(B - u)) / (2.0 * u - B)


def k_of_u_limit(B: float) -> float:
    """``lim_{u -> B/2+} k(u) = 8 / (B (B - 2))``."""
    return 8.0 / (B * (B - 2.0))
