import json

import numpy as np
import pytest

from bimodalmap import MapParams, io, scan
from bimodalmap.continuation import BifurcationCurve, BifurcationKind, BifurcationPoint
from bimodalmap.exceptions import ConfigError
from bimodalmap.ode import OdeState, SectionEvent
from bimodalmap.orbits import critical_seeds, seed_attractor
from bimodalmap.regions import sample_boundary_curves
from bimodalmap.scan import sweep

SCHEMA = dict(nb=int, b=float, name=str, flag=bool, rng="pair", ks="floats", ns="ints")


def test_fmt():
    assert io.fmt(None) == "" and io.fmt(True) == "1" and io.fmt(np.bool_(False)) == "0"
    assert io.fmt(3) == "3" and io.fmt(float("nan")) == "nan"
    assert float(io.fmt(0.1 + 0.2)) == 0.1 + 0.2


def test_attractor_round_trip(tmp_path):
    p = MapParams(-11.9655, -28.854)
    found = {t: seed_attractor(p, x0, 20_000, 512, 256) for t, x0 in critical_seeds(p).items()}
    io.write_attractors(tmp_path / "a.csv", p.b, p.k, found)
    rows = io.read_attractors(tmp_path / "a.csv")
    assert sorted(r["period"] for r in rows) == [5, 7]
    for r in rows:
        a = found[r["seed_tag"]]
        assert r["kind"] == a.kind.value and np.allclose(r["points"], a.points, rtol=1e-11)


def test_grid_round_trip(tmp_path):
    g = scan((-12.0, -11.9), (-28.9, -28.8), 3, 2, n_transient=5000, n_sample=256, p_max=128)
    io.write_grid(tmp_path / "g.csv", g)
    g2 = io.read_grid(tmp_path / "g.csv")
    assert (g2.nb, g2.nk) == (3, 2)
    for r1, r2 in zip(g.cells, g2.cells):
        for c1, c2 in zip(r1, r2):
            assert (c1.region, c1.periods, c1.bistable) == (c2.region, c2.periods, c2.bistable)
            assert c2.lyapunov_max == pytest.approx(c1.lyapunov_max, rel=1e-11)
    assert np.allclose(g2.b_centers(), g.b_centers())


def test_grid_rejects_truncated(tmp_path):
    g = scan((0.5, 1.0), (-2.0, -1.0), 2, 2)
    path = tmp_path / "g.csv"
    io.write_grid(path, g)
    path.write_text("\n".join(path.read_text().splitlines()[:-1]) + "\n")
    with pytest.raises(ValueError):
        io.read_grid(path)


def test_curves_and_intersections_round_trip(tmp_path):
    pts = [BifurcationPoint(-11.9 - i * 1e-3, -28.8 - i * 1e-3, 0.1 * i, 5, BifurcationKind.Fold)
           for i in range(4)]
    c = BifurcationCurve(BifurcationKind.Fold, 5, pts)
    io.write_curves(tmp_path / "c.csv", [c])
    (c2,) = io.read_curves(tmp_path / "c.csv")
    assert c2.kind is c.kind and c2.n == 5 and c2.points == pts
    hits = [dict(curves=("fold5", "fold7"), b=-11.96, k=-28.85, x1=0.0, x2=1.0)]
    io.write_intersections(tmp_path / "h.json", hits)
    assert io.read_intersections(tmp_path / "h.json") == [
        {"curves": ["fold5", "fold7"], "b": -11.96, "k": -28.85}]


def test_boundary_round_trip(tmp_path):
    s = sample_boundary_curves(np.linspace(-40, -12, 5), np.linspace(-20, -3, 4))
    io.write_boundary_curves(tmp_path / "b.csv", s)
    assert io.read_boundary_curves(tmp_path / "b.csv") == s


def test_events_round_trip(tmp_path):
    ev = [SectionEvent(1.5, -0.25, OdeState(0.2, 0.1, 0.33)), SectionEvent(3.0, 0.5, OdeState(0.1, 0.2, 0.33))]
    io.write_events(tmp_path / "e.csv", ev)
    assert io.read_events(tmp_path / "e.csv") == ev


def test_sweep_tables(tmp_path):
    d = sweep("b", -40.0, (-30.0, -20.0), 3, n_plot=4, n_transient=1000)
    io.write_sweep(tmp_path / "s.csv", d)
    io.write_envelope(tmp_path / "e.csv", d)
    rows = io.read_table(tmp_path / "s.csv", io.SWEEP_COLUMNS)
    assert len(rows) == 3 * 2 * 4 and {r["seed"] for r in rows} == {"max", "min"}
    env = io.read_table(tmp_path / "e.csv", io.ENVELOPE_COLUMNS)
    assert len(env) == 3
    with pytest.raises(ValueError):
        io.read_table(tmp_path / "e.csv", io.SWEEP_COLUMNS)


def test_parse_config_all_types():
    text = """# comment
nb = 12
b = -3.5   # trailing
name = fig
flag = yes
rng = -1, 2
ks = 1 2 3.5
ns = 5, 7
"""
    cfg = io.parse_config_text(text, SCHEMA)
    assert cfg == dict(nb=12, b=-3.5, name="fig", flag=True, rng=(-1.0, 2.0), ks=(1.0, 2.0, 3.5),
                       ns=(5, 7))


@pytest.mark.parametrize("text,where", [
    ("nb = 1\nnb = 2", "cfg:2"),
    ("nb = x", "cfg:1 field 'nb'"),
    ("\n\nzz = 1", "cfg:3"),
    ("nb 1", "cfg:1"),
    ("flag = maybe", "cfg:1 field 'flag'"),
    ("rng = 1", "cfg:1 field 'rng'"),
])
def test_config_errors_name_line_and_field(text, where):
    with pytest.raises(ConfigError) as exc:
        io.parse_config_text(text, SCHEMA, "cfg")
    assert exc.value.where == where


def test_load_config_env_override(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("nb = 3\nb = 1.0\n")
    cfg = io.load_config(path, SCHEMA, env={"BIMODAL_NB": "9", "OTHER": "1"})
    assert cfg == dict(nb=9, b=1.0)
    with pytest.raises(ConfigError, match="BIMODAL_B"):
        io.load_config(path, SCHEMA, env={"BIMODAL_B": "abc"})
    with pytest.raises(ConfigError):
        io.load_config(tmp_path / "missing.cfg", SCHEMA, env={})
