"""
Raster scans of the (b, k) plane and one-parameter sweeps.

Every cell is computed independently from the two critical orbits, so a scan
is reproducible bit for bit and rows can be farmed out to worker processes.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from ._config import TOL
from .exceptions import UnresolvedAttractor
from .map_core import MapParams, evaluate, extrema
from .orbits import (Attractor, AttractorKind, basin_labels, critical_seeds,
                     merge_attractors, seed_attractor)
from .regions import RegionTag, classify

CHAOTIC = 0
UNRESOLVED = -1


@dataclass(frozen=True)
class CellSummary:
    """Attractor summary of one parameter cell.

    ``periods`` holds one entry per distinct attractor: the period, 0 for
    chaotic, -1 for an unresolved seed. Cells outside P have no entries.
    """

    region: RegionTag
    periods: Tuple[int, ...]
    bistable: bool
    lyapunov_max: float
    verified: Optional[bool] = None

    @property
    def unresolved(self):
        return UNRESOLVED in self.periods

    @property
    def period1(self):
        return self.periods[0] if self.periods else None

    @property
    def period2(self):
        return self.periods[1] if len(self.periods) > 1 else None


@dataclass
class ScanGrid:
    b_range: Tuple[float, float]
    k_range: Tuple[float, float]
    nb: int
    nk: int
    cells: List[List[CellSummary]]   # cells[j][i]: row j (k index), column i (b index)
    config: dict = field(default_factory=dict)

    def b_centers(self):
        return cell_centers(self.b_range, self.nb)

    def k_centers(self):
        return cell_centers(self.k_range, self.nk)

    def channel(self, name: str) -> np.ndarray:
        """``period`` (first attractor), ``period2``, ``bistable`` or ``lyapunov`` as an (nk, nb) array."""
        getters = {
            "period": lambda c: c.period1 if c.period1 is not None else -2,
            "period2": lambda c: c.period2 if c.period2 is not None else -2,
            "bistable": lambda c: c.bistable,
            "lyapunov": lambda c: c.lyapunov_max,
        }
        get = getters[name]
        return np.array([[get(c) for c in row] for row in self.cells])

    def report(self):
        flat = [c for row in self.cells for c in row]
        return {
            "cells": len(flat),
            "outside_P": sum(c.region is RegionTag.OutsideP for c in flat),
            "unresolved": sum(c.unresolved for c in flat),
            "bistable": sum(c.bistable for c in flat),
        }


def cell_centers(rng, n):
    lo, hi = rng
    return lo + (np.arange(n) + 0.5) * (hi - lo) / n


def summarize_cell(p: MapParams, n_transient=TOL.n_transient, n_sample=TOL.n_sample,
                   p_max=TOL.p_max, seed_policy="critical", rng_seed=0) -> CellSummary:
    region = classify(p)
    if region is RegionTag.OutsideP:
        return CellSummary(region, (), False, math.nan)
    if p.k >= -4.0:
        # monotone map: the fixed point attracts everything in P
        a = _safe_attractor(p, 0.0, n_transient, n_sample, p_max)
        if a is None:
            return CellSummary(region, (UNRESOLVED,), False, math.nan)
        return CellSummary(region, (a.period,), False, a.lyapunov)
    found = {tag: _safe_attractor(p, x0, n_transient, n_sample, p_max)
             for tag, x0 in critical_seeds(p).items()}
    if found["max"] is None or found["min"] is None:
        ok = [a for a in found.values() if a is not None]
        periods = tuple(a.period for a in ok) + (UNRESOLVED,) * (2 - len(ok))
        lyap = max((a.lyapunov for a in ok), default=math.nan)
        return CellSummary(region, periods, False, lyap)
    aset = merge_attractors(found)
    periods = tuple(a.period for a in aset.attractors)
    lyap = max(a.lyapunov for a in aset.attractors)
    verified = None
    if aset.bistable and seed_policy == "verify":
        verified = verify_bistable(p, aset, rng_seed=rng_seed)
    return CellSummary(region, periods, aset.bistable, lyap, verified)


def _safe_attractor(p, x0, n_transient, n_sample, p_max) -> Optional[Attractor]:
    try:
        a = seed_attractor(p, x0, n_transient, n_sample, p_max)
    except UnresolvedAttractor:
        return None
    return None if a.kind is AttractorKind.Divergent else a


def verify_bistable(p: MapParams, aset, n_seeds=32, rng_seed=0) -> bool:
    """Random seeds in the trapping region all reach one of the two attractors, and both are hit."""
    rng = np.random.default_rng(rng_seed)
    lo = min(float(np.min(a.tail)) for a in aset.attractors)
    hi = max(float(np.max(a.tail)) for a in aset.attractors)
    seeds = rng.uniform(lo, hi, n_seeds)
    labels = basin_labels(p, seeds, aset, n_transient=TOL.n_transient)
    return bool(np.all(labels >= 0) and len(set(labels.tolist())) == 2)


def _row_job(args):
    k, bs, kwargs = args
    return [summarize_cell(MapParams(float(b), float(k)), **kwargs) for b in bs]


def scan_points(points: Sequence[Tuple[float, float]], **kwargs) -> List[CellSummary]:
    return [summarize_cell(MapParams(float(b), float(k)), **kwargs) for b, k in points]


def scan(b_range, k_range, nb: int, nk: int, n_transient=TOL.n_transient,
         n_sample=TOL.n_sample, p_max=TOL.p_max, seed_policy="critical",
         threads: int = 1, progress: Optional[Callable[[int, int], None]] = None) -> ScanGrid:
    """Summarize every cell of an ``nb x nk`` raster over the given ranges.

    Work is split into rows of constant ``k``; with ``threads > 1`` rows run
    in worker processes. Results do not depend on ``threads``.
    """
    if nb < 1 or nk < 1:
        raise ValueError("nb and nk must be positive")
    kwargs = dict(n_transient=n_transient, n_sample=n_sample, p_max=p_max, seed_policy=seed_policy)
    bs = cell_centers(b_range, nb)
    jobs = [(float(k), bs, kwargs) for k in cell_centers(k_range, nk)]
    rows: List[List[CellSummary]] = []
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for j, row in enumerate(pool.map(_row_job, jobs)):
                rows.append(row)
                if progress:
                    progress(j + 1, nk)
    else:
        for j, job in enumerate(jobs):
            rows.append(_row_job(job))
            if progress:
                progress(j + 1, nk)
    config = dict(b_min=b_range[0], b_max=b_range[1], k_min=k_range[0], k_max=k_range[1],
                  nb=nb, nk=nk, n_transient=n_transient, n_sample=n_sample, seed_policy=seed_policy)
    return ScanGrid(tuple(b_range), tuple(k_range), nb, nk, rows, config)


# -- sweeps --------------------------------------------------------------------

@dataclass
class SweepSample:
    param: float
    b: float
    k: float
    tail_max: np.ndarray
    tail_min: np.ndarray
    candidates: dict
    envelope: Optional[Tuple[float, float, str]]


@dataclass
class SweepDiagram:
    axis: str
    fixed_value: float
    samples: List[SweepSample]


def _exact_range(p: MapParams, lo, hi, turning):
    vals = [float(evaluate(p, lo)), float(evaluate(p, hi))]
    vals += [float(evaluate(p, c)) for c in turning if lo <= c <= hi]
    return min(vals), max(vals)


def candidate_intervals(p: MapParams):
    """The three turning-point interval candidates, keyed by kind."""
    x_max, x_min = extrema(p.k)
    f_max, f_min = float(evaluate(p, x_max)), float(evaluate(p, x_min))
    return {
        "Jminus": (float(evaluate(p, f_max)), f_max),
        "J0": (f_min, f_max),
        "Jplus": (f_min, float(evaluate(p, f_min))),
    }


def invariant_envelope(p: MapParams, rtol=1e-12):
    """Narrowest candidate interval that ``f`` maps into itself, or None.

    Invariance is checked from the exact range of ``f`` on the interval
    (endpoint values and turning-point values inside).
    """
    turning = extrema(p.k)
    best = None
    for kind, (lo, hi) in candidate_intervals(p).items():
        if not hi > lo:
            continue
        slack = rtol * max(1.0, abs(lo), abs(hi))
        rlo, rhi = _exact_range(p, lo, hi, turning)
        if rlo >= lo - slack and rhi <= hi + slack:
            if best is None or hi - lo < best[1] - best[0]:
                best = (lo, hi, kind)
    return best


def sweep(axis: str, fixed_value: float, value_range, n_points: int, n_plot: int = 200,
          n_transient=TOL.n_transient) -> SweepDiagram:
    """Bifurcation diagram along ``b`` (at fixed k) or ``k`` (at fixed b)."""
    if axis not in ("b", "k"):
        raise ValueError("axis must be 'b' or 'k'")
    samples = []
    for v in np.linspace(value_range[0], value_range[1], n_points):
        b, k = (float(v), float(fixed_value)) if axis == "b" else (float(fixed_value), float(v))
        p = MapParams(b, k)
        cands, env = {}, None
        if k <= -4.0:
            seeds = critical_seeds(p)
            x_max, x_min = seeds["max"], seeds["min"]
            f_max, f_min = float(evaluate(p, x_max)), float(evaluate(p, x_min))
            cands = {"f_xmin": f_min, "f_xmax": f_max,
                     "f2_xmin": float(evaluate(p, f_min)), "f2_xmax": float(evaluate(p, f_max))}
            if classify(p) is not RegionTag.OutsideP:
                env = invariant_envelope(p)
        else:
            x_max = x_min = 0.0
        tails = []
        for x0 in (x_max, x_min):
            tail, _, escaped = _kernels.iterate_tail(b, k, x0, n_transient, n_plot, TOL.escape_bound)
            tails.append(np.empty(0) if escaped else tail)
        samples.append(SweepSample(float(v), b, k, tails[0], tails[1], cands, env))
    return SweepDiagram(axis, float(fixed_value), samples)

