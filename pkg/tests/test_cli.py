import json

import pytest

from bimodalmap import io
from bimodalmap.cli import FIGURES, Progress, parse_recipe, recipe_text, resolve_config, run
from bimodalmap.exceptions import ConfigError

FAST = ["--n-transient", "5000", "--n-sample", "256", "--p-max", "128"]


def test_attractor_command_reports_both_cycles(capsys, tmp_path):
    assert run(["attractor", "--b", "-11.9655", "--k", "-28.854", "--out", str(tmp_path)], env={}) == 0
    out = capsys.readouterr().out
    assert "attractors=2" in out and "bistable" in out
    assert "period=5" in out and "period=7" in out
    assert sorted(r["period"] for r in io.read_attractors(tmp_path / "attractor.csv")) == [5, 7]


def test_attractor_multiple_points(capsys):
    assert run(["attractor", "--points", "-11.9655", "-28.85", "-1", "-3"], env={}) == 0
    out = capsys.readouterr().out
    assert out.count("attractors=1") == 2 and "chaotic" in out


def test_scan_outputs_and_progress(tmp_path, capsys):
    argv = ["scan", "--b-min", "-12", "--b-max", "-11.9", "--k-min", "-28.9", "--k-max", "-28.8",
            "--nb", "4", "--nk", "3", "--out", str(tmp_path)] + FAST
    assert run(argv, env={}) == 0
    err = capsys.readouterr().err
    assert "PROGRESS scan 3/3 100%" in err
    first = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    assert set(first) == {"scan.csv", "scan_period.ppm", "scan_period.ppm.json",
                          "scan_bistable.ppm", "scan_bistable.ppm.json"}
    assert run(argv, env={}) == 0
    assert first == {p.name: p.read_bytes() for p in tmp_path.iterdir()}


def test_scan_empty_window(tmp_path, capsys):
    argv = ["scan", "--b-min", "0.5", "--b-max", "1", "--k-min", "-2", "--k-max", "-1",
            "--nb", "2", "--nk", "2", "--render", "no", "--out", str(tmp_path)]
    assert run(argv, env={}) == 0
    assert "4 outside P" in capsys.readouterr().out
    assert all(c.region.value == "OutsideP" for r in io.read_grid(tmp_path / "scan.csv").cells for c in r)


def test_sweep_command(tmp_path):
    argv = ["sweep", "--fixed", "-40", "--lo", "-30", "--hi", "-10", "--n-points", "5",
            "--n-plot", "8", "--n-transient", "2000", "--out", str(tmp_path)]
    assert run(argv, env={}) == 0
    assert len(io.read_table(tmp_path / "sweep.csv", io.SWEEP_COLUMNS)) == 5 * 2 * 8
    assert len(io.read_table(tmp_path / "sweep_envelope.csv", io.ENVELOPE_COLUMNS)) == 5


def test_curves_command(tmp_path, capsys):
    argv = ["curves", "--folds", "5", "7", "--k-min", "-28.86", "--k-max", "-28.84",
            "--out", str(tmp_path)]
    assert run(argv, env={}) == 0
    hits = io.read_intersections(tmp_path / "curves_intersections.json")
    assert any(abs(h["b"] + 11.96536) < 1e-4 and abs(h["k"] + 28.85218) < 1e-4 for h in hits)
    assert {c.curve_id for c in io.read_curves(tmp_path / "curves.csv")} == {"fold5", "fold7"}


def test_curves_boundaries_only(tmp_path):
    argv = ["curves", "--boundary-b", "-20", "-3", "--boundary-k", "-40", "-12",
            "--boundary-n", "5", "--out", str(tmp_path)]
    assert run(argv, env={}) == 0
    assert len(io.read_boundary_curves(tmp_path / "curves_boundaries.csv")) == 15


def test_period2_command(tmp_path, capsys):
    assert run(["period2", "--b", "-12", "--k", "-30", "--n-mesh", "20001", "--out", str(tmp_path)],
               env={}) == 0
    out = capsys.readouterr().out
    assert "period2_points_found=2" in out
    rec = json.loads((tmp_path / "period2.json").read_text())
    assert rec["k_reconstructed"] == pytest.approx(-30, abs=1e-9)


def test_ode_command(tmp_path, capsys):
    argv = ["ode-poincare", "--n-events", "5", "--tol", "1e-7", "--out", str(tmp_path)]
    assert run(argv, env={}) == 0
    assert "events=5" in capsys.readouterr().out
    assert len(io.read_events(tmp_path / "ode_events.csv")) == 5


@pytest.mark.parametrize("argv", [
    ["scan", "--nb", "0"],
    ["scan", "--b-min", "1", "--b-max", "0"],
    ["attractor", "--b", "-3"],
    ["ode-poincare", "--tol", "1e-2"],
    ["sweep", "--axis", "z"],
    ["scan", "--nb", "ten"],
    ["nosuchcommand"],
])
def test_config_errors_exit_2(argv, tmp_path, capsys):
    assert run(argv + (["--out", str(tmp_path)] if argv[0] == "scan" else []), env={}) == 2


def test_config_file_error_names_line(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("nb = 4\nnk = x\n")
    assert run(["scan", "--config", str(cfg)], env={}) == 2
    assert "bad.cfg:2 field 'nk'" in capsys.readouterr().err


def test_runtime_error_exit_1(capsys):
    # inside the stable region there is no 2-cycle
    assert run(["period2", "--b", "-1", "--k", "-3"], env={}) == 1
    assert run(["attractor", "--b", "1", "--k", "-3"], env={}) == 1
    assert "error" in capsys.readouterr().err


def test_precedence(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("nb = 3\nnk = 4\n")
    r = resolve_config("scan", cfg, {"nk": 7}, env={"BIMODAL_NB": "5", "BIMODAL_NK": "6"},
                       base={"nb": 2, "p_max": 10})
    assert (r["nb"], r["nk"], r["p_max"]) == (5, 7, 10)


def test_recipes_parse():
    for name in FIGURES:
        jobs = parse_recipe(recipe_text(name), name)
        assert jobs and all(stem for _, stem, _ in jobs)
    with pytest.raises(ConfigError, match="r:3"):
        parse_recipe("[scan a]\nnb = 2\n[bogus b]\n", "r")
    with pytest.raises(ConfigError, match="r:2 field 'nk'"):
        parse_recipe("[scan a]\nnk = q\n", "r")


def test_figures_fig3_with_env_override(tmp_path, capsys):
    env = {"BIMODAL_N_POINTS": "6", "BIMODAL_N_PLOT": "5", "BIMODAL_N_TRANSIENT": "1000"}
    assert run(["figures", "--only", "fig3", "--out", str(tmp_path)], env=env) == 0
    assert len(io.read_table(tmp_path / "fig3_envelope.csv", io.ENVELOPE_COLUMNS)) == 6


def test_progress_once_per_percent():
    import io as _io
    buf = _io.StringIO()
    pr = Progress("x", buf)
    for i in range(1, 1001):
        pr(i, 1000)
    lines = buf.getvalue().splitlines()
    assert len(lines) == 101 and lines[-1] == "PROGRESS x 1000/1000 100%"
