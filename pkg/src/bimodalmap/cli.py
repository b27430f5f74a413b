"""
Command-line front end.

    bimodalmap [--threads N] <command> [--config FILE] [--out DIR] [flags]

Every config key can also be set through an environment variable named
``BIMODAL_<KEY>`` (for example ``BIMODAL_NB=200``); explicit flags win over
both. Exit status is 0 on success, 2 for configuration errors and 1 for
runtime failures.
"""
from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from . import io
from ._config import TOL
from .continuation import (BifurcationKind, continue_curve, crisis_boundary_scan, harvest_cycle,
                           intersect_curves, seed_from_cycle)
from .exceptions import BimodalMapError, ConfigError, NotInRegion
from .map_core import MapParams, critical_points
from .ode import OdeParams, OdeState, cloud_thickness, poincare_section
from .orbits import (critical_seeds, find_period2, merge_attractors, period2_uniqueness_check,
                     seed_attractor)
from .regions import RegionTag, classify, sample_boundary_curves
from .render import render_heatmap
from .scan import scan, sweep

FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6")

SCHEMAS: Dict[str, Dict[str, object]] = {
    "scan": dict(b_min=float, b_max=float, k_min=float, k_max=float, nb=int, nk=int,
                 n_transient=int, n_sample=int, p_max=int, seed_policy=str, render=bool),
    "sweep": dict(axis=str, fixed=float, lo=float, hi=float, n_points=int, n_plot=int,
                  n_transient=int),
    "curves": dict(folds="ints", flips="ints", seed_b=float, seed_k=float, axis=str,
                   fold_direction=float, flip_direction=float, step=float, k_min=float,
                   k_max=float, max_points=int, intersect=bool, crisis_families="ints",
                   crisis_b_min=float, crisis_b_max=float, crisis_k_min=float,
                   crisis_k_max=float, crisis_resolution=float, boundary_b="floats",
                   boundary_k="floats", boundary_n=int),
    "attractor": dict(b=float, k=float, points="floats", n_transient=int, n_sample=int, p_max=int),
    "period2": dict(b=float, k=float, n_mesh=int),
    "ode-poincare": dict(m1=float, m2=float, lambda1=float, lambda2=float, a1=float, a2=float,
                         y1=float, y2=float, s0=float, s_level=float, n_events=int, tol=float,
                         skip=int),
}

DEFAULTS: Dict[str, dict] = {
    "scan": dict(b_min=-25.0, b_max=-0.5, k_min=-60.0, k_max=-5.0, nb=100, nk=100,
                 n_transient=TOL.n_transient, n_sample=TOL.n_sample, p_max=TOL.p_max,
                 seed_policy="critical", render=True),
    "sweep": dict(axis="b", fixed=-40.0, lo=-39.9, hi=-0.1, n_points=400, n_plot=200,
                  n_transient=TOL.n_transient),
    "curves": dict(folds=(), flips=(), seed_b=-11.9655, seed_k=-28.854, axis="k",
                   fold_direction=1.0, flip_direction=-1.0, step=1e-4, k_min=-28.9,
                   k_max=-28.8, max_points=20_000, intersect=True, crisis_families=(),
                   crisis_b_min=-11.975, crisis_b_max=-11.955, crisis_k_min=-28.87,
                   crisis_k_max=-28.854, crisis_resolution=2e-3, boundary_b=(),
                   boundary_k=(), boundary_n=0),
    "attractor": dict(b=None, k=None, points=(), n_transient=TOL.n_transient,
                      n_sample=TOL.n_sample, p_max=TOL.p_max),
    "period2": dict(b=None, k=None, n_mesh=200_001),
    "ode-poincare": dict(m1=1.933, m2=5.048, lambda1=0.327, lambda2=0.332, a1=0.068, a2=1.684,
                         y1=0.1, y2=0.1, s0=0.5, s_level=None, n_events=200, tol=1e-9, skip=0),
}


class Progress:
    """Writes ``PROGRESS <label> <done>/<total> <pct>%`` to stderr once per percent."""

    def __init__(self, label: str, stream=None):
        self.label = label
        self.stream = stream if stream is not None else sys.stderr
        self.last = -1

    def __call__(self, done: int, total: int):
        pct = int(100 * done / total) if total else 100
        if pct > self.last:
            self.last = pct
            print(f"PROGRESS {self.label} {done}/{total} {pct}%", file=self.stream, flush=True)


# -- configuration ---------------------------------------------------------------

def resolve_config(command: str, path=None, overrides: Optional[dict] = None, env=None,
                   base: Optional[dict] = None) -> dict:
    """Defaults < ``base`` (recipe section) < config file < environment < flags."""
    schema = SCHEMAS[command]
    cfg = dict(DEFAULTS[command])
    cfg.update(base or {})
    cfg.update(io.load_config(path, schema, env=env))
    cfg.update({k: v for k, v in (overrides or {}).items() if v is not None})
    validate(command, cfg)
    return cfg


def validate(command: str, cfg: dict):
    def need(cond, field, msg):
        if not cond:
            raise ConfigError(msg, f"field {field!r}")

    if command == "scan":
        need(cfg["b_min"] < cfg["b_max"], "b_max", "b_max must exceed b_min")
        need(cfg["k_min"] < cfg["k_max"], "k_max", "k_max must exceed k_min")
        need(cfg["nb"] >= 1, "nb", "must be positive")
        need(cfg["nk"] >= 1, "nk", "must be positive")
        need(cfg["seed_policy"] in ("critical", "verify"), "seed_policy", "must be critical or verify")
    if command in ("scan", "attractor"):
        need(cfg["n_transient"] >= 0, "n_transient", "must be non-negative")
        need(cfg["n_transient"] + cfg["n_sample"] <= TOL.iteration_cap, "n_transient",
             f"n_transient + n_sample must not exceed {TOL.iteration_cap}")
        need(1 <= cfg["p_max"] <= cfg["n_sample"] // 2, "p_max", "must lie in [1, n_sample/2]")
    if command == "sweep":
        need(cfg["axis"] in ("b", "k"), "axis", "must be b or k")
        need(cfg["n_points"] >= 1, "n_points", "must be positive")
    if command == "curves":
        need(cfg["axis"] in ("b", "k"), "axis", "must be b or k")
        need(cfg["step"] > 0, "step", "must be positive")
        need(cfg["k_min"] < cfg["k_max"], "k_max", "k_max must exceed k_min")
        need(cfg["crisis_resolution"] > 0, "crisis_resolution", "must be positive")
    if command in ("attractor", "period2") and not cfg.get("points"):
        need(cfg["b"] is not None and cfg["k"] is not None, "b", "b and k are required")
    if command == "attractor":
        need(len(cfg["points"]) % 2 == 0, "points", "expects b k pairs")
    if command == "ode-poincare":
        need(1e-12 <= cfg["tol"] <= 1e-4, "tol", "must lie in [1e-12, 1e-4]")
        need(cfg["n_events"] >= 2, "n_events", "must be at least 2")
        need(min(cfg[f] for f in ("m1", "m2", "lambda1", "lambda2", "a1", "a2")) > 0, "m1",
             "ODE parameters must be positive")


# -- commands --------------------------------------------------------------------

def _out_dir(out) -> Path:
    d = Path(out) if out else Path(".")
    d.mkdir(parents=True, exist_ok=True)
    return d


def do_scan(cfg, out: Path, stem: str = "scan", threads: int = 1, log=print):
    grid = scan((cfg["b_min"], cfg["b_max"]), (cfg["k_min"], cfg["k_max"]), cfg["nb"], cfg["nk"],
                n_transient=cfg["n_transient"], n_sample=cfg["n_sample"], p_max=cfg["p_max"],
                seed_policy=cfg["seed_policy"], threads=threads, progress=Progress(stem))
    paths = [out / f"{stem}.csv"]
    io.write_grid(paths[0], grid)
    if cfg["render"]:
        for channel in ("period", "bistable"):
            paths.append(render_heatmap(grid, channel, out / f"{stem}_{channel}.ppm"))
    rep = grid.report()
    log(f"{stem}: {rep['cells']} cells, {rep['outside_P']} outside P, "
        f"{rep['bistable']} bistable, {rep['unresolved']} unresolved")
    return paths


def do_sweep(cfg, out: Path, stem: str = "sweep", log=print, **_):
    diagram = sweep(cfg["axis"], cfg["fixed"], (cfg["lo"], cfg["hi"]), cfg["n_points"],
                    n_plot=cfg["n_plot"], n_transient=cfg["n_transient"])
    paths = [out / f"{stem}.csv", out / f"{stem}_envelope.csv"]
    io.write_sweep(paths[0], diagram)
    io.write_envelope(paths[1], diagram)
    log(f"{stem}: {len(diagram.samples)} parameter values along {cfg['axis']}")
    return paths


def _trace(cfg, n, kind, log):
    p = MapParams(cfg["seed_b"], cfg["seed_k"])
    if n == 1:
        x = critical_points(p).x_star
    else:
        x = harvest_cycle(p, n)
        if x is None:
            raise BimodalMapError(f"no attracting {n}-cycle at seed {p}")
    direction = cfg["fold_direction"] if kind is BifurcationKind.Fold else cfg["flip_direction"]
    seed = seed_from_cycle(p, x, n, kind, axis=cfg["axis"], direction=direction)
    curve = continue_curve(seed, cfg["step"], (cfg["k_min"], cfg["k_max"]), cfg["max_points"])
    log(f"{curve.curve_id}: {len(curve.points)} points, stops {','.join(curve.stop_reasons)}")
    return curve


def do_curves(cfg, out: Path, stem: str = "curves", log=print, **_):
    paths = []
    curves = [_trace(cfg, n, BifurcationKind.Fold, log) for n in cfg["folds"]]
    curves += [_trace(cfg, n, BifurcationKind.Flip, log) for n in cfg["flips"]]
    if curves:
        paths.append(out / f"{stem}.csv")
        io.write_curves(paths[-1], curves)
    if cfg["intersect"] and len(curves) > 1:
        hits = []
        for i in range(len(curves)):
            for j in range(i + 1, len(curves)):
                if curves[i].n != curves[j].n:
                    hits += intersect_curves(curves[i], curves[j])
        paths.append(out / f"{stem}_intersections.json")
        io.write_intersections(paths[-1], hits)
        for h in hits:
            log(f"intersection {h['curves'][0]} x {h['curves'][1]}: b={h['b']:.12g} k={h['k']:.12g}")
    if cfg["crisis_families"]:
        window = ((cfg["crisis_b_min"], cfg["crisis_b_max"]), (cfg["crisis_k_min"], cfg["crisis_k_max"]))
        paths.append(out / f"{stem}_crisis.csv")
        rows = []
        for n in cfg["crisis_families"]:
            samples = crisis_boundary_scan(window, n, resolution=cfg["crisis_resolution"])
            rows += [[f"theta{n}", n, io.fmt(s.b), io.fmt(s.k)] for s in samples]
            log(f"theta{n}: {len(samples)} boundary samples")
        with io._open_w(paths[-1]) as fh:
            w = io._writer(fh)
            w.writerow(["curve_id", "n", "b", "k"])
            w.writerows(rows)
    if cfg["boundary_n"] > 0 and (cfg["boundary_b"] or cfg["boundary_k"]):
        bb = np.linspace(*cfg["boundary_b"], cfg["boundary_n"]) if cfg["boundary_b"] else None
        kk = np.linspace(*cfg["boundary_k"], cfg["boundary_n"]) if cfg["boundary_k"] else None
        paths.append(out / f"{stem}_boundaries.csv")
        io.write_boundary_curves(paths[-1], sample_boundary_curves(kk, bb))
    return paths


def _attractor_points(cfg) -> List[Tuple[float, float]]:
    pts = cfg["points"]
    if pts:
        return [(pts[i], pts[i + 1]) for i in range(0, len(pts), 2)]
    return [(cfg["b"], cfg["k"])]


def do_attractor(cfg, out: Optional[Path], stem: str = "attractor", log=print, **_):
    paths = []
    for idx, (b, k) in enumerate(_attractor_points(cfg)):
        p = MapParams(b, k)
        if classify(p) is RegionTag.OutsideP:
            raise NotInRegion(f"({b}, {k}) is outside P")
        # a monotone map has no critical points; seed at 0 instead
        seeds = critical_seeds(p) if k < -4.0 else {"x0": 0.0}
        found = {tag: seed_attractor(p, x0, cfg["n_transient"], cfg["n_sample"], cfg["p_max"])
                 for tag, x0 in seeds.items()}
        aset = merge_attractors(found if k < -4.0 else {"max": found["x0"], "min": found["x0"]})
        log(f"b={b:.12g} k={k:.12g} region={classify(p).value}")
        for tag, a in found.items():
            log(f"  seed={tag} kind={a.kind.value} period={a.period} lyapunov={a.lyapunov:.6g}")
        labels = ", ".join(str(a.label) for a in aset.attractors)
        log(f"  attractors={len(aset.attractors)} [{labels}]" + (" bistable" if aset.bistable else ""))
        if out is not None:
            name = stem if len(_attractor_points(cfg)) == 1 else f"{stem}_{idx}"
            paths.append(out / f"{name}.csv")
            io.write_attractors(paths[-1], b, k, found)
    return paths


def do_period2(cfg, out: Optional[Path], stem: str = "period2", log=print, **_):
    p = MapParams(cfg["b"], cfg["k"])
    orb = find_period2(p)
    count = period2_uniqueness_check(p, cfg["n_mesh"])
    rec = dict(b=p.b, k=p.k, x1=orb.x1, x2=orb.x2, u1=orb.u1, u2=orb.u2, B=orb.B,
               k_reconstructed=orb.k_reconstructed, period2_points_found=count)
    for key, val in rec.items():
        log(f"{key}={val:.15g}" if isinstance(val, float) else f"{key}={val}")
    if out is None:
        return []
    path = out / f"{stem}.json"
    path.write_text(json.dumps(rec, indent=2) + "\n")
    return [path]


def do_ode(cfg, out: Optional[Path], stem: str = "ode_events", log=print, **_):
    p = OdeParams(cfg["m1"], cfg["m2"], cfg["lambda1"], cfg["lambda2"], cfg["a1"], cfg["a2"])
    st = OdeState(cfg["y1"], cfg["y2"], cfg["s0"])
    events = poincare_section(p, st, cfg["n_events"] + cfg["skip"], cfg["s_level"], cfg["tol"])
    events = events[cfg["skip"]:]
    x = np.array([e.x for e in events])
    finite = x[np.isfinite(x)]
    if len(finite) >= 2:
        cloud = np.column_stack([finite[:-1], finite[1:]])
        log(f"events={len(events)} x in [{finite.min():.6g}, {finite.max():.6g}] "
            f"thickness={cloud_thickness(cloud):.3g}")
    else:
        log(f"events={len(events)}")
    if out is None:
        return []
    path = out / f"{stem}.csv"
    io.write_events(path, events)
    return [path]


COMMANDS: Dict[str, Callable] = {
    "scan": do_scan, "sweep": do_sweep, "curves": do_curves, "attractor": do_attractor,
    "period2": do_period2, "ode-poincare": do_ode,
}


# -- figure recipes --------------------------------------------------------------

def recipe_text(name: str) -> str:
    return resources.files("bimodalmap").joinpath("recipes", f"{name}.cfg").read_text()


def parse_recipe(text: str, source: str) -> List[Tuple[str, str, dict]]:
    """Split a recipe into ``[command stem]`` sections of ``key = value`` lines."""
    jobs, cur, body, start = [], None, [], 0

    def flush():
        if cur is not None:
            cmd, stem, lineno = cur
            padded = "\n" * lineno + "\n".join(body)
            jobs.append((cmd, stem, io.parse_config_text(padded, SCHEMAS[cmd], source)))

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line.startswith("[") and line.endswith("]"):
            flush()
            parts = line[1:-1].split()
            if len(parts) != 2 or parts[0] not in SCHEMAS:
                raise ConfigError(f"section must be [command stem], got {line}", f"{source}:{lineno}")
            cur, body = (parts[0], parts[1], lineno), []
        elif cur is None and line:
            raise ConfigError("content before the first section", f"{source}:{lineno}")
        else:
            body.append(raw)
    flush()
    return jobs


def do_figures(names, out: Path, threads: int = 1, log=print, env=None):
    paths = []
    for name in names:
        jobs = parse_recipe(recipe_text(name), f"recipes/{name}.cfg")
        for cmd, stem, base in jobs:
            cfg = resolve_config(cmd, base=base, env=env)
            log(f"[{name}] {cmd} -> {stem}")
            paths += COMMANDS[cmd](cfg, out, stem=stem, threads=threads, log=log)
    return paths


# -- argument parsing ----------------------------------------------------------

def _flag(name):
    return "--" + name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bimodalmap", description=__doc__.split("\n\n")[0].strip())
    ap.add_argument("--threads", type=int, default=1, help="worker processes for scans")
    sub = ap.add_subparsers(dest="command", required=True)
    for cmd, schema in SCHEMAS.items():
        sp = sub.add_parser(cmd)
        sp.add_argument("--config", help="key = value config file")
        sp.add_argument("--out", help="output directory")
        for key, typ in schema.items():
            if typ in (int, float, str):
                sp.add_argument(_flag(key), dest=key, type=typ, default=None)
            elif typ is bool:
                sp.add_argument(_flag(key), dest=key, type=io._parse_bool, default=None)
            else:
                conv = {"floats": float, "ints": int, "pair": float}[typ]
                sp.add_argument(_flag(key), dest=key, type=conv, nargs="+", default=None)
    fig = sub.add_parser("figures")
    fig.add_argument("--only", action="append", choices=FIGURES,
                     help="run one recipe (repeatable); default all")
    fig.add_argument("--out", help="output directory")
    fig.add_argument("--config", help=argparse.SUPPRESS)
    return ap


def run(argv=None, env=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return 2
    try:
        if args.command == "figures":
            names = args.only or list(FIGURES)
            do_figures(names, _out_dir(args.out), threads=args.threads, env=env)
            return 0
        schema = SCHEMAS[args.command]
        overrides = {}
        for key, typ in schema.items():
            val = getattr(args, key)
            if val is not None and typ in ("floats", "ints"):
                val = tuple(val)
            overrides[key] = val
        cfg = resolve_config(args.command, args.config, overrides, env=env)
        out = _out_dir(args.out) if (args.out or args.command in ("scan", "sweep", "curves")) else None
        COMMANDS[args.command](cfg, out, threads=args.threads)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (BimodalMapError, ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
