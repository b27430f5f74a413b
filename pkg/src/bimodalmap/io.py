"""
CSV/JSON serialization and the ``key = value`` job configuration format.

Every writer has a matching reader so that outputs can be re-parsed under
the same schema. Floats are written as the shortest string that round-trips
exactly (``repr``), or at a fixed ``%.Ng`` where a precision is given; both
keep outputs byte-identical across runs.
"""
from __future__ import annotations

import csv
import json
import math
import os
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional

import numpy as np

from .continuation import BifurcationCurve, BifurcationKind, BifurcationPoint
from .exceptions import ConfigError
from .ode import OdeState, SectionEvent
from .orbits import Attractor
from .regions import BoundaryCurveSample, CurveId, RegionTag
from .scan import CellSummary, ScanGrid, SweepDiagram

ENV_PREFIX = "BIMODAL_"

ATTRACTOR_COLUMNS = ["b", "k", "seed_tag", "kind", "period", "lyapunov", "points"]
GRID_COLUMNS = ["b", "k", "region", "period1", "period2", "bistable", "lyapunov"]
CURVE_COLUMNS = ["kind", "n", "b", "k", "x"]
BOUNDARY_COLUMNS = ["curve_id", "k", "b"]
EVENT_COLUMNS = ["t", "x", "y1", "y2", "s"]
SWEEP_COLUMNS = ["param", "b", "k", "seed", "x"]
ENVELOPE_COLUMNS = ["param", "b", "k", "kind", "lo", "hi", "f_xmin", "f_xmax", "f2_xmin", "f2_xmax"]


def fmt(v, digits: Optional[int] = None) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    return repr(v) if digits is None else f"{v:.{digits}g}"


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _open_w(path):
    return open(path, "w", newline="")


# -- attractors ----------------------------------------------------------------

def write_attractors(path, b: float, k: float, found: Mapping[str, Attractor]):
    """One row per critical seed (``max`` / ``min``)."""
    with _open_w(path) as fh:
        w = _writer(fh)
        w.writerow(ATTRACTOR_COLUMNS)
        for tag, a in found.items():
            pts = ";".join(fmt(x, 12) for x in a.points)
            w.writerow([fmt(b), fmt(k), tag, a.kind.value, a.period, fmt(a.lyapunov, 12), pts])


def read_attractors(path) -> List[dict]:
    rows = []
    with open(path, newline="") as fh:
        for r in _rows(fh, ATTRACTOR_COLUMNS):
            rows.append(dict(b=float(r["b"]), k=float(r["k"]), seed_tag=r["seed_tag"],
                             kind=r["kind"], period=int(r["period"]), lyapunov=float(r["lyapunov"]),
                             points=[float(x) for x in r["points"].split(";") if x]))
    return rows


def _rows(fh, columns):
    reader = csv.DictReader(line for line in fh if not line.startswith("#"))
    if reader.fieldnames != columns:
        raise ValueError(f"expected columns {columns}, got {reader.fieldnames}")
    return reader


# -- scan grids ----------------------------------------------------------------

def _config_line(config: Mapping) -> str:
    return "# " + " ".join(f"{k}={config[k]}" for k in sorted(config))


def write_grid(path, grid: ScanGrid):
    """Config header line, then one row per cell in row-major (k, then b) order."""
    bs, ks = grid.b_centers(), grid.k_centers()
    with _open_w(path) as fh:
        fh.write(_config_line(grid.config) + "\n")
        w = _writer(fh)
        w.writerow(GRID_COLUMNS)
        for j, row in enumerate(grid.cells):
            for i, c in enumerate(row):
                w.writerow([fmt(bs[i]), fmt(ks[j]), c.region.value, fmt(c.period1), fmt(c.period2),
                            fmt(c.bistable), fmt(c.lyapunov_max, 12)])


def read_grid(path) -> ScanGrid:
    with open(path, newline="") as fh:
        head = fh.readline()
        if not head.startswith("#"):
            raise ValueError("missing config header line")
        config = {}
        for tok in head[1:].split():
            key, _, val = tok.partition("=")
            config[key] = _autotype(val)
        cells = []
        for r in _rows(fh, GRID_COLUMNS):
            periods = tuple(int(r[c]) for c in ("period1", "period2") if r[c] != "")
            cells.append(CellSummary(RegionTag(r["region"]), periods, r["bistable"] == "1",
                                     float(r["lyapunov"])))
    nb, nk = int(config["nb"]), int(config["nk"])
    if len(cells) != nb * nk:
        raise ValueError(f"expected {nb * nk} cells, found {len(cells)}")
    rows = [cells[j * nb:(j + 1) * nb] for j in range(nk)]
    return ScanGrid((config["b_min"], config["b_max"]), (config["k_min"], config["k_max"]),
                    nb, nk, rows, config)


def _autotype(val: str):
    for conv in (int, float):
        try:
            return conv(val)
        except ValueError:
            pass
    return val


# -- curves --------------------------------------------------------------------

def write_curves(path, curves: Iterable[BifurcationCurve]):
    with _open_w(path) as fh:
        w = _writer(fh)
        w.writerow(CURVE_COLUMNS)
        for c in curves:
            for q in c.points:
                w.writerow([c.kind.value, c.n, fmt(q.b), fmt(q.k), fmt(q.x)])


def read_curves(path) -> List[BifurcationCurve]:
    curves: Dict[tuple, List[BifurcationPoint]] = {}
    with open(path, newline="") as fh:
        for r in _rows(fh, CURVE_COLUMNS):
            kind, n = BifurcationKind(r["kind"]), int(r["n"])
            curves.setdefault((kind, n), []).append(
                BifurcationPoint(float(r["b"]), float(r["k"]), float(r["x"]), n, kind))
    return [BifurcationCurve(kind, n, pts) for (kind, n), pts in curves.items()]


def write_intersections(path, hits: Iterable[dict]):
    recs = [{"curves": list(h["curves"]), "b": float(h["b"]), "k": float(h["k"])} for h in hits]
    with open(path, "w") as fh:
        json.dump(recs, fh, indent=2)
        fh.write("\n")


def read_intersections(path) -> List[dict]:
    with open(path) as fh:
        return json.load(fh)


def write_boundary_curves(path, samples: Iterable[BoundaryCurveSample]):
    with _open_w(path) as fh:
        w = _writer(fh)
        w.writerow(BOUNDARY_COLUMNS)
        for s in samples:
            w.writerow([s.curve_id.value, fmt(s.k), fmt(s.b)])


def read_boundary_curves(path) -> List[BoundaryCurveSample]:
    with open(path, newline="") as fh:
        return [BoundaryCurveSample(float(r["k"]), float(r["b"]), CurveId(r["curve_id"]))
                for r in _rows(fh, BOUNDARY_COLUMNS)]


# -- sweeps and ODE events -----------------------------------------------------

def write_sweep(path, diagram: SweepDiagram):
    """Long format: one row per plotted tail point, tagged by its critical seed."""
    with _open_w(path) as fh:
        w = _writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for s in diagram.samples:
            for seed, tail in (("max", s.tail_max), ("min", s.tail_min)):
                for x in tail:
                    w.writerow([fmt(s.param), fmt(s.b), fmt(s.k), seed, fmt(x, 12)])


def write_envelope(path, diagram: SweepDiagram):
    with _open_w(path) as fh:
        w = _writer(fh)
        w.writerow(ENVELOPE_COLUMNS)
        for s in diagram.samples:
            lo, hi, kind = s.envelope if s.envelope else (None, None, "")
            c = s.candidates
            w.writerow([fmt(s.param), fmt(s.b), fmt(s.k), kind, fmt(lo), fmt(hi),
                        fmt(c.get("f_xmin")), fmt(c.get("f_xmax")),
                        fmt(c.get("f2_xmin")), fmt(c.get("f2_xmax"))])


def read_table(path, columns) -> List[dict]:
    """Generic reader for the flat CSV schemas above."""
    with open(path, newline="") as fh:
        return list(_rows(fh, columns))


def write_events(path, events: Iterable[SectionEvent]):
    with _open_w(path) as fh:
        w = _writer(fh)
        w.writerow(EVENT_COLUMNS)
        for e in events:
            w.writerow([fmt(e.t), fmt(e.x), fmt(e.state.y1), fmt(e.state.y2), fmt(e.state.s)])


def read_events(path) -> List[SectionEvent]:
    with open(path, newline="") as fh:
        return [SectionEvent(float(r["t"]), float(r["x"]),
                             OdeState(float(r["y1"]), float(r["y2"]), float(r["s"])))
                for r in _rows(fh, EVENT_COLUMNS)]


# -- configuration -------------------------------------------------------------

def _parse_bool(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_pair(s):
    parts = [p for p in s.replace(",", " ").split() if p]
    if len(parts) != 2:
        raise ValueError(f"expected two numbers, got {s!r}")
    return (float(parts[0]), float(parts[1]))


def _parse_floats(s):
    return tuple(float(p) for p in s.replace(",", " ").split())


def _parse_ints(s):
    return tuple(int(p) for p in s.replace(",", " ").split())


CONVERTERS = {int: int, float: float, str: str, bool: _parse_bool,
              "pair": _parse_pair, "floats": _parse_floats, "ints": _parse_ints}


def parse_config_text(text: str, schema: Mapping[str, object], source: str = "<config>") -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    Raises ConfigError naming the line number and field on any problem.
    """
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", where)
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in schema:
            raise ConfigError(f"unknown field {key!r}", where)
        if key in out:
            raise ConfigError(f"duplicate field {key!r}", where)
        out[key] = _convert(key, val, schema[key], f"{where} field {key!r}")
    return out


def _convert(key, val, typ, where):
    try:
        return CONVERTERS[typ](val)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad value {val!r}: {exc}", where) from None


def load_config(path: Optional[os.PathLike], schema: Mapping[str, object],
                env: Optional[Mapping[str, str]] = None, prefix: str = ENV_PREFIX) -> dict:
    """Config file values, overridden by ``<prefix><KEY>`` environment variables."""
    out = {}
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc.strerror}", str(p)) from None
        out.update(parse_config_text(text, schema, str(p)))
    env = os.environ if env is None else env
    for key, typ in schema.items():
        name = prefix + key.upper()
        if name in env:
            out[key] = _convert(key, env[name], typ, f"environment {name}")
    return out
