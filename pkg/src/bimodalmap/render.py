"""Binary PPM (P6) heatmaps of scan grids, with a JSON legend next to each image."""
from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from .regions import RegionTag
from .scan import CHAOTIC, UNRESOLVED, ScanGrid

# periods 1..16, then one color for everything longer
PERIOD_COLORS = [
    (31, 119, 180), (255, 127, 14), (44, 160, 44), (214, 39, 40),
    (148, 103, 189), (140, 86, 75), (227, 119, 194), (188, 189, 34),
    (23, 190, 207), (174, 199, 232), (255, 187, 120), (152, 223, 138),
    (255, 152, 150), (197, 176, 213), (196, 156, 148), (219, 219, 141),
]
LONG_PERIOD = (99, 99, 160)
CHAOS = (0, 0, 0)
BISTABLE = (255, 0, 255)
OUTSIDE = (255, 255, 255)
UNRESOLVED_GRAY = (128, 128, 128)
MONOSTABLE = (210, 210, 210)

CHANNELS = ("period", "bistable", "lyapunov")


def _period_color(period):
    if period == CHAOTIC:
        return CHAOS
    if period == UNRESOLVED:
        return UNRESOLVED_GRAY
    if 1 <= period <= len(PERIOD_COLORS):
        return PERIOD_COLORS[period - 1]
    return LONG_PERIOD


def _lyapunov_color(lyap, clip=1.0):
    if not np.isfinite(lyap):
        return UNRESOLVED_GRAY
    t = float(np.clip(lyap / clip, -1.0, 1.0))
    if t < 0:  # stable: white -> blue
        v = int(round(255 * (1 + t)))
        return (v, v, 255)
    v = int(round(255 * (1 - t)))  # chaotic: white -> red
    return (255, v, v)


def grid_to_rgb(grid: ScanGrid, channel: str = "period") -> np.ndarray:
    """(nk, nb, 3) uint8 image; row 0 is the largest k."""
    if channel not in CHANNELS:
        raise ValueError(f"channel must be one of {CHANNELS}")
    img = np.empty((grid.nk, grid.nb, 3), dtype=np.uint8)
    for j, row in enumerate(grid.cells):
        for i, c in enumerate(row):
            if c.region is RegionTag.OutsideP:
                rgb = OUTSIDE
            elif channel == "period":
                rgb = BISTABLE if c.bistable else _period_color(c.period1)
            elif channel == "bistable":
                rgb = BISTABLE if c.bistable else (UNRESOLVED_GRAY if c.unresolved else MONOSTABLE)
            else:
                rgb = _lyapunov_color(c.lyapunov_max)
            img[grid.nk - 1 - j, i] = rgb
    return img


def legend(grid: ScanGrid, channel: str) -> dict:
    out = {
        "channel": channel,
        "b_range": list(grid.b_range),
        "k_range": list(grid.k_range),
        "nb": grid.nb,
        "nk": grid.nk,
        "orientation": "columns: b increasing left to right; rows: k decreasing top to bottom",
        "OutsideP": list(OUTSIDE),
    }
    if channel == "period":
        out["periods"] = {str(i + 1): list(c) for i, c in enumerate(PERIOD_COLORS)}
        out["period>16"] = list(LONG_PERIOD)
        out["chaotic"] = list(CHAOS)
        out["unresolved"] = list(UNRESOLVED_GRAY)
        out["bistable"] = list(BISTABLE)
    elif channel == "bistable":
        out["bistable"] = list(BISTABLE)
        out["single_attractor"] = list(MONOSTABLE)
        out["unresolved"] = list(UNRESOLVED_GRAY)
    else:
        out["scale"] = "lyapunov clipped to [-1, 1]; blue negative, white zero, red positive"
        out["unresolved"] = list(UNRESOLVED_GRAY)
    return out


def write_ppm(path, img: np.ndarray):
    h, w, _ = img.shape
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (w, h))
        fh.write(np.ascontiguousarray(img, dtype=np.uint8).tobytes())


def read_ppm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    m = re.match(rb"P6\s+(\d+)\s+(\d+)\s+(\d+)\s", data)
    if m is None:
        raise ValueError("not a binary PPM file")
    w, h, maxval = (int(g) for g in m.groups())
    if maxval != 255:
        raise ValueError("only 8-bit PPM is supported")
    body = data[m.end(): m.end() + w * h * 3]
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w, 3)


def render_heatmap(grid: ScanGrid, channel: str, path) -> Path:
    """Write ``path`` (PPM) and ``path`` + ``.json`` (legend). Returns the image path."""
    path = Path(path)
    write_ppm(path, grid_to_rgb(grid, channel))
    with open(path.with_name(path.name + ".json"), "w") as fh:
        json.dump(legend(grid, channel), fh, indent=2)
    return path
