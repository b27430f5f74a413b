"""
Fold and flip curves of n-cycles in the (b, k) plane.

A point ``(x, b, k)`` lies on the fold curve of period ``n`` when
``f^n(x) = x`` and ``(f^n)'(x) = +1``, and on the flip curve when the
multiplier is ``-1``. Curves are traced by pseudo-arclength continuation in
``(x, b, k)``; all Jacobians come from chain-rule products along the orbit.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ._config import TOL
from .exceptions import NoConvergence, SingularJacobian
from .map_core import MapParams
from .orbits import (AttractorKind, attractor_set, cycle_residual, nearest_distances,
                     orbit_points)
from .regions import in_P


class BifurcationKind(str, enum.Enum):
    Fold = "Fold"
    Flip = "Flip"

    @property
    def multiplier(self):
        return 1.0 if self is BifurcationKind.Fold else -1.0


@dataclass(frozen=True)
class BifurcationPoint:
    b: float
    k: float
    x: float
    n: int
    kind: BifurcationKind

    @property
    def params(self):
        return MapParams(self.b, self.k)


@dataclass
class BifurcationCurve:
    kind: BifurcationKind
    n: int
    points: List[BifurcationPoint]
    stop_reasons: Tuple[str, ...] = ()

    @property
    def curve_id(self):
        return f"{self.kind.value.lower()}{self.n}"

    def bk(self) -> np.ndarray:
        return np.array([[q.b, q.k] for q in self.points])


@dataclass(frozen=True)
class CrisisBoundarySample:
    b: float
    k: float
    n_family: int


def cycle_jet(x: float, b: float, k: float, n: int):
    """Residual ``f^n(x) - x``, multiplier ``(f^n)'(x)`` and their gradients.

    Gradients are with respect to ``(x, b, k)``.
    """
    y = x
    dy = np.array([1.0, 0.0, 0.0])
    D = 1.0
    dD = np.zeros(3)
    for _ in range(n):
        ey = math.exp(-abs(y))
        if y > 0:
            sig, q = 1.0 / (1.0 + ey), ey / (1.0 + ey)   # q = 1 / (1 + e^y)
        else:
            sig, q = ey / (1.0 + ey), 1.0 / (1.0 + ey)
        s1 = sig * q
        fp = 1.0 + k * s1
        fpp = k * s1 * (q - sig)
        dD = dD * fp + D * (fpp * dy + np.array([0.0, 0.0, s1]))
        D *= fp
        dy = fp * dy + np.array([0.0, 1.0, -q])
        y = b + y - k * q
    dF = dy - np.array([1.0, 0.0, 0.0])
    return y - x, D, dF, dD


def multiplier(p: MapParams, x: float, n: int) -> float:
    return cycle_jet(x, p.b, p.k, n)[1]


def _residual(z, n, s):
    F, D, dF, dD = cycle_jet(z[0], z[1], z[2], n)
    return np.array([F, D - s]), np.vstack([dF, dD])


def _check_minimal(x, b, k, n):
    for d in range(1, n):
        if n % d == 0 and cycle_residual(MapParams(b, k), x, d) < 1e-8:
            raise NoConvergence(f"solution collapsed to a period-{d} orbit",
                                residuals=np.array([cycle_residual(MapParams(b, k), x, d)]))


def locate_cycle_bifurcation(p0: MapParams, x0: float, n: int, kind: BifurcationKind,
                             free: str = "b", maxiter: int = TOL.newton_maxiter,
                             tol: float = TOL.newton_tol) -> BifurcationPoint:
    """Newton solve for a fold or flip point of an n-cycle.

    Unknowns are ``x`` and one parameter (``free='b'`` keeps ``k`` fixed,
    ``free='k'`` keeps ``b`` fixed). The start ``(x0, p0)`` should have
    residuals below about 0.1.
    """
    kind = BifurcationKind(kind)
    if free not in ("b", "k"):
        raise ValueError("free must be 'b' or 'k'")
    col = 1 if free == "b" else 2
    z = np.array([float(x0), float(p0.b), float(p0.k)])
    s = kind.multiplier
    G, J = _residual(z, n, s)
    for _ in range(maxiter):
        if np.all(np.abs(G) < tol):
            break
        A = J[:, [0, col]]
        det = np.linalg.det(A)
        if not abs(det) >= TOL.singular_det:
            raise SingularJacobian(f"|det| = {abs(det):.3g}", residuals=G)
        delta = np.linalg.solve(A, -G)
        lam = 1.0
        norm0 = np.linalg.norm(G)
        for _ in range(12):
            trial = z.copy()
            trial[[0, col]] += lam * delta
            Gt, Jt = _residual(trial, n, s)
            if np.all(np.isfinite(Gt)) and np.linalg.norm(Gt) < norm0 * (1 - 1e-4 * lam) or lam < 1e-3:
                break
            lam *= 0.5
        if not np.all(np.isfinite(Gt)):
            raise NoConvergence("non-finite residual", residuals=G)
        z, G, J = trial, Gt, Jt
    else:
        if not np.all(np.abs(G) < tol):
            raise NoConvergence(f"no convergence after {maxiter} iterations", residuals=G)
    if not np.all(np.abs(G) < tol):
        raise NoConvergence(f"no convergence after {maxiter} iterations", residuals=G)
    _check_minimal(z[0], z[1], z[2], n)
    return BifurcationPoint(float(z[1]), float(z[2]), float(z[0]), n, kind)


def _tangent(J, prev=None):
    t = np.cross(J[0], J[1])
    norm = np.linalg.norm(t)
    if norm == 0.0:
        raise SingularJacobian("rank-deficient Jacobian on the curve")
    t /= norm
    if prev is not None and np.dot(t, prev) < 0:
        t = -t
    return t


def _corrector(z_pred, t, n, s, maxiter=TOL.newton_maxiter, tol=TOL.newton_tol):
    z = z_pred.copy()
    for _ in range(maxiter):
        G, J = _residual(z, n, s)
        if not np.all(np.isfinite(G)):
            break
        arc = np.dot(t, z - z_pred)
        if np.all(np.abs(G) < tol) and abs(arc) < 1e-12:
            return z
        A = np.vstack([J, t])
        try:
            delta = np.linalg.solve(A, -np.append(G, arc))
        except np.linalg.LinAlgError:
            break
        z = z + delta
    return None


def continue_curve(seed: BifurcationPoint, step: float, k_range: Sequence[float],
                   max_points: int = 100_000, both_directions: bool = True) -> BifurcationCurve:
    """Trace the curve through ``seed`` until it leaves ``k_range`` or P.

    Steps are at most ``step`` long in ``(x, b, k)`` and are halved on
    corrector failure, down to ``step / 64``.
    """
    k_lo, k_hi = min(k_range), max(k_range)
    n, s = seed.n, seed.kind.multiplier
    z0 = np.array([seed.x, seed.b, seed.k])
    t0 = _tangent(_residual(z0, n, s)[1])
    branches, reasons = [], []
    for sign in ((1.0, -1.0) if both_directions else (1.0,)):
        z, t, h = z0, sign * t0, step
        pts, reason = [], "max_points"
        while len(pts) < max_points:
            z_new = None
            while h >= step / 64:
                z_new = _corrector(z + h * t, t, n, s)
                if z_new is not None and np.linalg.norm(z_new - z) <= 1.5 * h:
                    break
                z_new = None
                h *= 0.5
            if z_new is None:
                reason = "no_convergence"
                break
            if not (k_lo <= z_new[2] <= k_hi):
                reason = "k_range"
                break
            if not in_P(MapParams(z_new[1], z_new[2])):
                reason = "left_P"
                break
            t = _tangent(_residual(z_new, n, s)[1], t)
            z = z_new
            pts.append(BifurcationPoint(float(z[1]), float(z[2]), float(z[0]), n, seed.kind))
            h = min(step, 2.0 * h)
        branches.append(pts)
        reasons.append(reason)
    if both_directions:
        points = branches[1][::-1] + [seed] + branches[0]
    else:
        points = [seed] + branches[0]
    return BifurcationCurve(seed.kind, n, points, tuple(reasons))


def harvest_cycle(p: MapParams, n: int, **kwargs) -> Optional[float]:
    """A point of the attracting n-cycle at ``p``, if the critical orbits find one."""
    for a in attractor_set(p, **kwargs).attractors:
        if a.is_periodic and a.period == n:
            return float(a.points[0])
    return None


def _track_cycle(b, k, x, n):
    z = x
    for _ in range(40):
        F, D, dF, _ = cycle_jet(z, b, k, n)
        if abs(F) < 1e-12:
            return z, D
        if dF[0] == 0.0:
            return None
        z -= F / dF[0]
        if not math.isfinite(z):
            return None
    F, D, _, _ = cycle_jet(z, b, k, n)
    return (z, D) if abs(F) < 1e-10 else None


def seed_from_cycle(p: MapParams, x: float, n: int, kind: BifurcationKind,
                    axis: str = "k", direction: float = 1.0, h0: float = 1e-4,
                    max_steps: int = 10_000, approach: float = 0.05,
                    h_max: float = 0.1) -> BifurcationPoint:
    """Walk a cycle along one parameter axis until its multiplier nears ±1, then solve.

    ``x`` must be a point of an n-cycle at ``p`` (typically harvested from a
    scan cell). The walk follows the cycle by Newton continuation and halves
    its step whenever the cycle is lost or the multiplier overshoots, and
    doubles it (up to ``h_max``) after each accepted step.
    """
    kind = BifurcationKind(kind)
    s = kind.multiplier
    b, k = p.b, p.k
    got = _track_cycle(b, k, x, n)
    if got is None:
        raise NoConvergence("starting point is not on an n-cycle")
    x, D = got
    h = h0
    for _ in range(max_steps):
        if abs(D - s) < approach:
            break
        nb, nk = (b + direction * h, k) if axis == "b" else (b, k + direction * h)
        got = _track_cycle(nb, nk, x, n)
        if got is None or (got[1] - s) * (D - s) < 0:
            h *= 0.5
            if h < 1e-14:
                break
            continue
        b, k = nb, nk
        x, D = got
        h = min(2.0 * h, h_max)
    else:
        raise NoConvergence("multiplier never approached the target")
    free = "b" if axis == "b" else "k"
    return locate_cycle_bifurcation(MapParams(b, k), x, n, kind, free=free)


def _segment_intersections(P, Q):
    out = []
    for i in range(len(P) - 1):
        p0, p1 = P[i], P[i + 1]
        r = p1 - p0
        for j in range(len(Q) - 1):
            q0, q1 = Q[j], Q[j + 1]
            sv = q1 - q0
            denom = r[0] * sv[1] - r[1] * sv[0]
            if denom == 0.0:
                continue
            qp = q0 - p0
            tt = (qp[0] * sv[1] - qp[1] * sv[0]) / denom
            uu = (qp[0] * r[1] - qp[1] * r[0]) / denom
            if 0.0 <= tt <= 1.0 and 0.0 <= uu <= 1.0:
                out.append((i, j, tt, uu))
    return out


def intersect_curves(c1: BifurcationCurve, c2: BifurcationCurve, tol: float = 1e-12):
    """Crossings of two curves, refined by Newton on both defining systems at once.

    Returns a list of dicts ``{"curves": [id1, id2], "b": ..., "k": ...,
    "x1": ..., "x2": ...}``.
    """
    P, Q = c1.bk(), c2.bk()
    results = []
    for i, j, tt, uu in _segment_intersections(P, Q):
        a0, a1 = c1.points[i], c1.points[i + 1]
        q0, q1 = c2.points[j], c2.points[j + 1]
        z = np.array([a0.x + tt * (a1.x - a0.x), q0.x + uu * (q1.x - q0.x),
                      a0.b + tt * (a1.b - a0.b), a0.k + tt * (a1.k - a0.k)])
        s1, s2 = c1.kind.multiplier, c2.kind.multiplier
        for _ in range(TOL.newton_maxiter):
            F1, D1, dF1, dD1 = cycle_jet(z[0], z[2], z[3], c1.n)
            F2, D2, dF2, dD2 = cycle_jet(z[1], z[2], z[3], c2.n)
            G = np.array([F1, D1 - s1, F2, D2 - s2])
            if np.all(np.abs(G) < tol):
                break
            J = np.array([[dF1[0], 0.0, dF1[1], dF1[2]],
                          [dD1[0], 0.0, dD1[1], dD1[2]],
                          [0.0, dF2[0], dF2[1], dF2[2]],
                          [0.0, dD2[0], dD2[1], dD2[2]]])
            z = z - np.linalg.solve(J, G)
        else:
            raise NoConvergence("intersection refinement failed", residuals=G)
        results.append({"curves": [c1.curve_id, c2.curve_id], "b": float(z[2]),
                        "k": float(z[3]), "x1": float(z[0]), "x2": float(z[1])})
    return results


def curve_tangent_bk(c: BifurcationCurve, b: float, k: float) -> np.ndarray:
    """Unit tangent in the (b, k) plane at the curve point nearest ``(b, k)``."""
    pts = c.bk()
    i = int(np.argmin(np.hypot(pts[:, 0] - b, pts[:, 1] - k)))
    q = c.points[i]
    t = _tangent(_residual(np.array([q.x, q.b, q.k]), c.n, c.kind.multiplier)[1])[1:]
    return t / np.linalg.norm(t)


def quadrant_probes(point, t1, t2, eps: float):
    """Four parameter points on the bisectors between two crossing curves."""
    b0, k0 = point
    out = []
    for s1, s2 in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
        d = s1 * np.asarray(t1) + s2 * np.asarray(t2)
        d = d / np.linalg.norm(d)
        out.append(MapParams(b0 + eps * d[0], k0 + eps * d[1]))
    return out


def attractor_multiset(p: MapParams, **kwargs):
    """Sorted labels of the attractors at ``p``; ``"chaotic"`` for chaotic ones."""
    labels = [a.label for a in attractor_set(p, **kwargs).attractors]
    return sorted(labels, key=str)


# -- crisis boundaries -----------------------------------------------------------

def _is_power_of_two(m):
    return m >= 1 and (m & (m - 1)) == 0


def family_member(attractor, skeleton: np.ndarray, p: MapParams, reach: float = 0.1) -> bool:
    """Whether an attractor descends from the n-cycle ``skeleton``.

    Cycles qualify when their period is ``n * 2^m`` and every skeleton
    point lies within ``reach`` of a cycle point. Chaotic attractors qualify when their bands number
    ``n * 2^m``, are visited in a fixed cyclic order, and every skeleton
    point lies within ``reach`` of a band.
    """
    n = len(skeleton)
    if attractor.is_periodic:
        m, r = divmod(attractor.period, n)
        if r or not _is_power_of_two(m):
            return False
        return bool(nearest_distances(skeleton, attractor.points).max() < reach)
    if attractor.kind is not AttractorKind.Chaotic:
        return False
    bands = attractor.bands
    m, r = divmod(len(bands), n)
    if r or not _is_power_of_two(m):
        return False
    lows = np.array([lo for lo, _ in bands])
    highs = np.array([hi for _, hi in bands])
    for x in skeleton:
        if not np.any((lows - reach <= x) & (x <= highs + reach)):
            return False
    labels = np.searchsorted(lows, attractor.tail, side="right") - 1
    c = len(bands)
    if len(labels) <= c:
        return False
    if not np.array_equal(labels[c:], labels[:-c]):
        return False
    return len(set(labels[:c].tolist())) == c


def _family_state(p: MapParams, skeleton_x: float, n: int, **kwargs):
    """``(present, skeleton_x)``; ``skeleton_x`` is None if the n-cycle is gone."""
    if not in_P(p) or p.k >= -4.0:
        return False, None
    got = _track_cycle(p.b, p.k, skeleton_x, n)
    if got is None:
        return False, None
    x, _ = got
    skeleton = orbit_points(p, x, n)
    try:
        aset = attractor_set(p, **kwargs)
    except Exception:  # unresolved verdicts count as "not a member"
        return False, x
    return any(family_member(a, skeleton, p) for a in aset.attractors), x


def crisis_boundary_scan(window, n_family: int, axis: str = "b", resolution: float = 1e-4,
                         **kwargs) -> List[CrisisBoundarySample]:
    """Parameters where the period-``n_family`` attractor family disappears while its cycle persists.

    ``window = ((b_min, b_max), (k_min, k_max))``. Grid lines run along
    ``axis`` with spacing ``resolution``; each present/absent transition with
    the n-cycle still existing on both sides is bisected to ``resolution/100``.
    """
    (b_min, b_max), (k_min, k_max) = window
    if axis == "b":
        lines = np.arange(k_min, k_max + 0.5 * resolution, resolution)
        along = np.arange(b_min, b_max + 0.5 * resolution, resolution)
        make = lambda fixed, v: MapParams(float(v), float(fixed))  # noqa: E731
    else:
        lines = np.arange(b_min, b_max + 0.5 * resolution, resolution)
        along = np.arange(k_min, k_max + 0.5 * resolution, resolution)
        make = lambda fixed, v: MapParams(float(fixed), float(v))  # noqa: E731
    samples = []
    for fixed in lines:
        for values in (along, along[::-1]):
            for v in _scan_line(make, fixed, values, n_family, resolution / 100.0, **kwargs):
                q = make(fixed, v)
                samples.append(CrisisBoundarySample(q.b, q.k, n_family))
    return samples


def _scan_line(make, fixed, values, n, tol, **kwargs):
    """Walk one grid line and return the refined present -> absent crisis edges."""
    edges = []
    skeleton_x, prev_v = None, None
    for v in values:
        p = make(fixed, v)
        if skeleton_x is None:
            if in_P(p) and p.k < -4.0:
                try:
                    skeleton_x = _seed_family(p, n, **kwargs)
                except Exception:  # unresolved verdicts: keep walking
                    skeleton_x = None
            prev_v = v if skeleton_x is not None else None
            continue
        present, new_x = _family_state(p, skeleton_x, n, **kwargs)
        if new_x is None:
            skeleton_x, prev_v = None, None
            continue
        if not present:
            edge = _bisect_edge(make, fixed, prev_v, v, skeleton_x, n, True, tol, **kwargs)
            if edge is not None:
                edges.append(edge)
            skeleton_x, prev_v = None, None
            continue
        skeleton_x, prev_v = new_x, v
    return edges


def _seed_family(p: MapParams, n: int, **kwargs):
    """Skeleton point if ``p`` carries an attracting cycle of period n * 2^m."""
    for a in attractor_set(p, **kwargs).attractors:
        if not a.is_periodic:
            continue
        m = a.period
        while m % 2 == 0 and m > n:
            m //= 2
        if m != n:
            continue
        got = _track_cycle(p.b, p.k, float(a.points[0]), n)
        if got is not None:
            return got[0]
    return None


def _bisect_edge(make, fixed, v_in, v_out, skeleton_x, n, present_at_in, tol, **kwargs):
    lo, hi = v_in, v_out
    x = skeleton_x
    while abs(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        present, new_x = _family_state(make(fixed, mid), x, n, **kwargs)
        if new_x is None:
            return None  # the cycle itself disappears: a fold, not a crisis
        x = new_x
        if present == present_at_in:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
