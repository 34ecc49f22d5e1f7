"""Command-line surface: formats, reports, exit codes, determinism."""

import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from kinklab import cli, ghca


@pytest.fixture()
def runner():
    return CliRunner()


def invoke(runner, tmp_path, *args):
    return runner.invoke(cli.main, list(args), env={"KINKLAB_OUT": str(tmp_path)})


def write_two_pulse_init(path):
    rule = ghca.CARule()
    cfg = ghca.place_pulses(60, [(10, +1), (40, -1)], rule=rule)
    path.write_text(",".join(str(int(v)) for v in cfg.cells) + "\n")


# --- module commands -------------------------------------------------------


def test_ghca_run_orbit_and_events(runner, tmp_path):
    init = tmp_path / "init.txt"
    write_two_pulse_init(init)
    res = invoke(
        runner, tmp_path, "ghca", "run", "--init", str(init),
        "--steps", "30", "--out", "orbit.csv",
    )
    assert res.exit_code == 0, res.output
    lines = (tmp_path / "orbit.csv").read_text().splitlines()
    assert lines[0].startswith("step,c000,c001")
    assert len(lines) == 1 + 31  # header + initial state + 30 steps
    events = json.loads((tmp_path / "orbit_events.json").read_text())
    assert len(events) == 1
    assert set(events[0]) == {"p", "s"}


def test_front_compute_json(runner, tmp_path):
    res = invoke(
        runner, tmp_path, "front", "compute", "--f0", "0.2", "--out", "front.json"
    )
    assert res.exit_code == 0, res.output
    data = json.loads((tmp_path / "front.json").read_text())
    for key in ("c", "mu", "lam", "a_plus", "a_minus", "capital_lambda", "a_L", "a_R"):
        assert isinstance(data[key], float)
    assert abs(data["c"] - 0.15805658962154467) < 1e-9
    assert len(data["z"]) == len(data["phi"]) == len(data["dphi"])


def test_ode_run_normalized_csv(runner, tmp_path):
    res = invoke(
        runner, tmp_path, "ode", "run", "--system", "normalized", "--n", "3",
        "--init", "6,7,8", "--t-end", "5", "--samples", "10", "--out", "traj.csv",
    )
    assert res.exit_code == 0, res.output
    lines = (tmp_path / "traj.csv").read_text().splitlines()
    assert lines[0] == "t,delta_1,delta_2,delta_3"
    assert len(lines) == 1 + 11


def test_ode_run_init_length_mismatch(runner, tmp_path):
    res = invoke(
        runner, tmp_path, "ode", "run", "--system", "normalized", "--n", "4",
        "--init", "6,7", "--t-end", "1", "--out", "t.csv",
    )
    assert res.exit_code != 0
    assert "expected n=4" in res.output


def test_blowup_eig_stdout(runner, tmp_path):
    res = invoke(runner, tmp_path, "blowup", "eig", "--n", "4")
    assert res.exit_code == 0, res.output
    data = json.loads(res.output.strip().splitlines()[-1])
    assert len(data["tangential"]) == 3
    assert data["transverse"] > 0


def test_blowup_census_count(runner, tmp_path):
    res = invoke(runner, tmp_path, "blowup", "census", "--n", "3", "--out", "eq.json")
    assert res.exit_code == 0, res.output
    entries = json.loads((tmp_path / "eq.json").read_text())
    assert len(entries) == 2 * (2**3 - 1)
    assert {"psi", "zero_pattern", "sigma", "tangential_eigenvalues",
            "transverse_eigenvalue"} <= set(entries[0])


def test_pbvp_solve_json(runner, tmp_path):
    res = invoke(
        runner, tmp_path, "pbvp", "solve", "--ell", "1", "--j", "1",
        "--out", "sol.json",
    )
    assert res.exit_code == 0, res.output
    sol = json.loads((tmp_path / "sol.json").read_text())
    assert abs(sol["a"] - 0.0633388510) < 1e-6
    assert len(sol["z"]) == len(sol["u"])


def test_pbvp_washout_config(runner, tmp_path):
    cfg = tmp_path / "w.toml"
    cfg.write_text(
        'f0 = 0.2\nell = 6.0\nkinks = [-3.0, 3.0]\nt_end = 20.0\n'
        'dt = 0.1\nh = 0.04\ncadence = 50\n'
    )
    res = invoke(
        runner, tmp_path, "pbvp", "washout", "--config", str(cfg), "--out", "w"
    )
    assert res.exit_code == 0, res.output
    lines = (tmp_path / "w" / "variance.csv").read_text().splitlines()
    assert lines[0] == "t,variance"
    meta = json.loads((tmp_path / "w" / "washout.json").read_text())
    assert "config_hash" in meta and "drift_speed" in meta


def test_pde_run_missing_keys_listed(runner, tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("f0 = 0.2\nh = 0.04\n[domain]\nx0 = -5.0\n")
    res = invoke(runner, tmp_path, "pde", "run", "--config", str(cfg), "--out", "o")
    assert res.exit_code != 0
    for key in ("dt", "t_end", "initial", "domain.n"):
        assert key in res.output


def test_pde_run_artifacts(runner, tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text(
        "f0 = 0.2\nh = 0.04\ndt = 0.05\nt_end = 5.0\ncadence = 50\n"
        "[domain]\nx0 = -10.0\nn = 501\n"
        "[initial]\nkinks = [0.0]\n"
    )
    res = invoke(runner, tmp_path, "pde", "run", "--config", str(cfg), "--out", "o")
    assert res.exit_code == 0, res.output
    names = sorted(p.name for p in (tmp_path / "o").iterdir())
    assert names == ["events.json", "positions.csv", "run.json", "snapshots.csv"]
    snap = (tmp_path / "o" / "snapshots.csv").read_text().splitlines()
    assert snap[0].startswith("x,u_t0,")
    assert len(snap) == 1 + 501
    pos = (tmp_path / "o" / "positions.csv").read_text().splitlines()
    assert pos[0] == "t,kink_1"
    run_meta = json.loads((tmp_path / "o" / "run.json").read_text())
    assert run_meta["frames"] == 3


# --- scenarios -------------------------------------------------------------


def test_scenario_list(runner, tmp_path):
    res = invoke(runner, tmp_path, "scenario", "list")
    assert res.exit_code == 0
    assert res.output.split() == ["fig1a", "fig1b", "fig3", "washout"]


def test_scenario_unknown_lists_available(runner, tmp_path):
    res = invoke(runner, tmp_path, "scenario", "run", "nope", "--out", "x")
    assert res.exit_code != 0
    for name in ("fig1a", "fig1b", "fig3", "washout"):
        assert name in res.output


def test_scenario_fig1a_report(runner, tmp_path):
    res = invoke(runner, tmp_path, "scenario", "run", "fig1a", "--out", "s")
    assert res.exit_code == 0, res.output
    report = json.loads((tmp_path / "s" / "fig1a" / "report.json").read_text())
    assert report["scenario"] == "fig1a"
    assert len(report["input_hash"]) == 64
    assert all(m["passed"] for m in report["metrics"])
    names = [m["name"] for m in report["metrics"]]
    assert "annihilation_count" in names
    assert sorted(report["artifacts"]) == ["events.json", "orbit.csv"]
    events = json.loads((tmp_path / "s" / "fig1a" / "events.json").read_text())
    assert [e["s"] for e in events] == sorted(e["s"] for e in events)
    assert len(events) == 4


def test_scenario_outputs_deterministic(runner, tmp_path):
    for out in ("d1", "d2"):
        res = invoke(runner, tmp_path, "scenario", "run", "fig1a", "--out", out)
        assert res.exit_code == 0, res.output
    a = (tmp_path / "d1" / "fig1a" / "orbit.csv").read_bytes()
    b = (tmp_path / "d2" / "fig1a" / "orbit.csv").read_bytes()
    assert a == b
    ra = json.loads((tmp_path / "d1" / "fig1a" / "report.json").read_text())
    rb = json.loads((tmp_path / "d2" / "fig1a" / "report.json").read_text())
    assert ra["input_hash"] == rb["input_hash"]


def test_scenario_config_override(runner, tmp_path):
    cfg = tmp_path / "o.toml"
    cfg.write_text("[fig1a]\nsteps = 170\n")
    res = invoke(
        runner, tmp_path, "scenario", "run", "fig1a",
        "--config", str(cfg), "--out", "s",
    )
    assert res.exit_code == 0, res.output
    report = json.loads((tmp_path / "s" / "fig1a" / "report.json").read_text())
    assert report["params"]["steps"] == 170


# --- comparisons -----------------------------------------------------------


def test_compare_identical_sequences(runner, tmp_path):
    ga = [{"p": 10, "s": 5}, {"p": 20, "s": 9}]
    pa = [{"x": 10.0, "t": 5.0}, {"x": 20.0, "t": 9.0}]
    (tmp_path / "g.json").write_text(json.dumps(ga))
    (tmp_path / "p.json").write_text(json.dumps(pa))
    res = invoke(
        runner, tmp_path, "compare", "collisions",
        "--ghca", str(tmp_path / "g.json"), "--pde", str(tmp_path / "p.json"),
        "--out", "cmp.json",
    )
    assert res.exit_code == 0, res.output
    report = json.loads((tmp_path / "cmp.json").read_text())
    assert report["tau"] == 1.0
    assert report["ordering_match"] is True
    assert all(e["dx"] == 0.0 and e["dt"] == 0.0 for e in report["events"])


def test_compare_count_mismatch_is_structural(runner, tmp_path):
    (tmp_path / "g.json").write_text(json.dumps([{"p": 10, "s": 5}]))
    (tmp_path / "p.json").write_text(
        json.dumps({"collisions": [{"x": 0.0, "t": 5.0}, {"x": 1.0, "t": 9.0}]})
    )
    res = invoke(
        runner, tmp_path, "compare", "collisions",
        "--ghca", str(tmp_path / "g.json"), "--pde", str(tmp_path / "p.json"),
        "--out", "cmp.json",
    )
    assert res.exit_code == 1
    report = json.loads((tmp_path / "cmp.json").read_text())
    failed = [m for m in report["metrics"] if not m["passed"]]
    assert [m["name"] for m in failed] == ["event_count_match"]


def test_compare_position_tolerance_fails(runner, tmp_path):
    (tmp_path / "g.json").write_text(json.dumps([{"p": 10, "s": 5}]))
    (tmp_path / "p.json").write_text(json.dumps([{"x": 12.0, "t": 5.0}]))
    res = invoke(
        runner, tmp_path, "compare", "collisions",
        "--ghca", str(tmp_path / "g.json"), "--pde", str(tmp_path / "p.json"),
        "--tol-x", "1.0",
    )
    assert res.exit_code == 1
    assert "[FAIL] max_position_gap" in res.output


def _write_curve(path, name, t, d):
    lines = [f"t,{name}"] + [f"{float(ti)!r},{float(di)!r}" for ti, di in zip(t, d)]
    path.write_text("\n".join(lines) + "\n")


def test_compare_distances_within_tolerance(runner, tmp_path):
    t = np.linspace(0.0, 10.0, 21)
    d = 12.0 + 0.3 * t
    _write_curve(tmp_path / "a.csv", "d_1", t, d)
    _write_curve(tmp_path / "b.csv", "d", t, d * 1.01)
    res = invoke(
        runner, tmp_path, "compare", "distances",
        "--pde", str(tmp_path / "a.csv"), "--pde-col", "d_1",
        "--ode", str(tmp_path / "b.csv"), "--ode-col", "d",
        "--out", "cmp.json",
    )
    assert res.exit_code == 0, res.output
    report = json.loads((tmp_path / "cmp.json").read_text())
    assert report["max_relative_deviation"] == pytest.approx(0.01, rel=0.05)


def test_compare_distances_exceeding_tolerance(runner, tmp_path):
    t = np.linspace(0.0, 10.0, 21)
    d = 12.0 + 0.3 * t
    _write_curve(tmp_path / "a.csv", "d", t, d)
    _write_curve(tmp_path / "b.csv", "d", t, d * 1.2)
    res = invoke(
        runner, tmp_path, "compare", "distances",
        "--pde", str(tmp_path / "a.csv"), "--pde-col", "d",
        "--ode", str(tmp_path / "b.csv"), "--ode-col", "d",
    )
    assert res.exit_code == 1
    assert "[FAIL] max_relative_deviation" in res.output


# --- plumbing --------------------------------------------------------------


def test_output_root_env_resolves_relative_paths(runner, tmp_path):
    res = invoke(
        runner, tmp_path, "blowup", "eig", "--n", "2", "--out", "sub/eig.json"
    )
    assert res.exit_code == 0, res.output
    assert (tmp_path / "sub" / "eig.json").exists()


def test_csv_cells_use_decimal_point_and_roundtrip(runner, tmp_path):
    cells = cli._fmt_cell(0.1), cli._fmt_cell(np.float64(2.5)), cli._fmt_cell(3)
    assert cells == ("0.1", "2.5", "3")
    assert cli._fmt_cell(float("nan")) == ""


def test_json_sorted_keys(runner, tmp_path):
    cli._write_json(tmp_path / "x.json", {"b": 1, "a": {"d": 2, "c": [3]}})
    text = (tmp_path / "x.json").read_text()
    assert text.index('"a"') < text.index('"b"')
    assert text.index('"c"') < text.index('"d"')
