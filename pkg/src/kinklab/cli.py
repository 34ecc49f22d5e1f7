"""Command line binding every module: runs, scenarios, comparisons.

Output contract: CSV files are comma-separated with a header row and
``.`` decimals; JSON files are UTF-8 with keys in sorted order.  Paths
given to ``--out`` resolve against the ``KINKLAB_OUT`` environment
variable when they are relative.  Commands that emit metric rows exit
with status 0 exactly when every row passes.
"""

import concurrent.futures
import hashlib
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import click
import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - python < 3.11
    import tomli as tomllib

from . import blowup as blowup_mod
from . import ghca as ghca_mod
from . import pbvp as pbvp_mod
from . import pde as pde_mod
from . import positions as positions_mod
from . import reduced_ode
from .front import compute_front, compute_speed
from .nonlinearity import make_nonlinearity

OUTPUT_ROOT_ENV = "KINKLAB_OUT"
EIGHT_PI = 8.0 * np.pi


# --- plumbing --------------------------------------------------------------


def _resolve(path) -> Path:
    p = Path(path)
    if not p.is_absolute():
        p = Path(os.environ.get(OUTPUT_ROOT_ENV, ".")) / p
    return p


def _fmt_cell(v) -> str:
    """Decimal-point float formatting that round-trips; NaN is empty."""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if np.isnan(v):
        return ""
    return repr(v)


def _write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(str(h) for h in header)]
    lines += [",".join(_fmt_cell(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if np.isnan(v) else v
    return obj


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_jsonable(obj), sort_keys=True, indent=2)
    path.write_text(text + "\n", encoding="utf-8")


def _config_hash(obj) -> str:
    canon = json.dumps(_jsonable(obj), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _load_toml(path) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _variance_ratio(final: float, initial: float) -> float:
    """final/initial spread, with an equidistant start (zero spread) mapped to 0/inf."""
    if initial > 0.0:
        return final / initial
    return 0.0 if final <= initial else float("inf")


# --- reports ---------------------------------------------------------------


@dataclass(frozen=True)
class MetricRow:
    """One machine-checkable pass/fail criterion of a pipeline run."""

    name: str
    value: float
    tolerance: float | None
    passed: bool


@dataclass(frozen=True)
class Report:
    scenario: str
    rows: tuple
    input_hash: str
    artifacts: tuple

    def all_pass(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "input_hash": self.input_hash,
            "artifacts": list(self.artifacts),
            "metrics": [
                {
                    "name": r.name,
                    "value": r.value,
                    "tolerance": r.tolerance,
                    "passed": bool(r.passed),
                }
                for r in self.rows
            ],
        }


@dataclass(frozen=True)
class ExperimentConfig:
    """A named pipeline plus its parameters and output directory."""

    scenario: str
    params: dict
    out_dir: Path
    seed: int | None = None


def _echo_rows(rows) -> None:
    for r in rows:
        status = "PASS" if r.passed else "FAIL"
        tol = "-" if r.tolerance is None else repr(float(r.tolerance))
        click.echo(f"[{status}] {r.name}: value={r.value!r} tolerance={tol}")


# --- collision-sequence comparison ----------------------------------------


def compare_collision_sequences(
    ghca_events, pde_events, map_x0=0.0, map_dx=1.0, tol_x=None, tol_t=None
) -> dict:
    """Match two annihilation sequences after fitting one time scale.

    ``ghca_events`` is a list of ``{"p": cell, "s": step}``; ``pde_events``
    a list of ``{"x": position, "t": time}``.  Cells map to coordinates
    via ``x = map_x0 + map_dx * p``.  The scalar ``tau`` minimizes
    ``sum (t_n - tau * s_n)^2``; events pair up in time order.  A count
    mismatch is reported as a structural failure, not an exception.
    """
    ge = sorted(ghca_events, key=lambda e: (e["s"], e["p"]))
    pe = sorted(pde_events, key=lambda e: (e["t"], e["x"]))
    rows = [
        MetricRow(
            "event_count_match",
            float(abs(len(ge) - len(pe))),
            0.0,
            len(ge) == len(pe),
        )
    ]
    out = {
        "n_ghca": len(ge),
        "n_pde": len(pe),
        "tau": None,
        "events": [],
        "ordering_match": None,
    }
    if len(ge) != len(pe) or not ge:
        out["rows"] = rows
        return out
    s = np.array([e["s"] for e in ge], dtype=float)
    t = np.array([e["t"] for e in pe], dtype=float)
    xg = map_x0 + map_dx * np.array([e["p"] for e in ge], dtype=float)
    xp = np.array([e["x"] for e in pe], dtype=float)
    tau = float(s @ t / (s @ s)) if s @ s > 0 else float("nan")
    dts = t - tau * s
    dxs = xp - xg
    out["tau"] = tau
    out["events"] = [
        {
            "index": k,
            "p_mapped": float(xg[k]),
            "x": float(xp[k]),
            "dx": float(dxs[k]),
            "s_scaled": float(tau * s[k]),
            "t": float(t[k]),
            "dt": float(dts[k]),
        }
        for k in range(len(ge))
    ]
    # ordering: wherever two events are spatially distinguishable in one
    # system, the other system must place them on the same side
    sep = max(abs(map_dx), 1e-12)
    order_ok = True
    for i in range(len(ge)):
        for k in range(i + 1, len(ge)):
            gi, pi = xg[k] - xg[i], xp[k] - xp[i]
            if abs(gi) > sep and abs(pi) > sep and np.sign(gi) != np.sign(pi):
                order_ok = False
    out["ordering_match"] = order_ok
    rows.append(MetricRow("ordering_match", 1.0 if order_ok else 0.0, 0.0, order_ok))
    rows.append(MetricRow("tau", tau, None, True))
    max_dx = float(np.max(np.abs(dxs)))
    max_dt = float(np.max(np.abs(dts)))
    rows.append(
        MetricRow(
            "max_position_gap",
            max_dx,
            tol_x,
            True if tol_x is None else max_dx <= tol_x,
        )
    )
    rows.append(
        MetricRow(
            "max_time_gap",
            max_dt,
            tol_t,
            True if tol_t is None else max_dt <= tol_t,
        )
    )
    out["rows"] = rows
    return out


# --- scenarios -------------------------------------------------------------


def _scenario_fig1a(params: dict, out_dir: Path):
    """Four nested excitation pairs annihilating inside-out."""
    rule = ghca_mod.CARule(e=params["e"], r=params["r"])
    center = params["center"]
    placements = []
    for half_gap in params["half_gaps"]:
        placements += [(center - half_gap, +1), (center + half_gap + 1, -1)]
    cfg = ghca_mod.place_pulses(params["n_cells"], placements, rule=rule)
    orbit = ghca_mod.run(rule, cfg, params["steps"])
    seq = ghca_mod.extract_collisions(rule, orbit)

    n = params["n_cells"]
    _write_csv(
        out_dir / "orbit.csv",
        ["step"] + [f"c{k:03d}" for k in range(n)],
        [[i] + list(map(int, c.cells)) for i, c in enumerate(orbit)],
    )
    events = [{"p": int(e.position), "s": int(e.time)} for e in seq.events]
    _write_json(out_dir / "events.json", events)

    times = seq.times()
    count = len(seq.events)
    rows = [
        MetricRow("annihilation_count", float(count), 0.0, count == 4),
        MetricRow(
            "times_strictly_increasing",
            float(np.min(np.diff(times))) if count > 1 else float("nan"),
            0.0,
            count > 1 and bool(np.all(np.diff(times) > 0)),
        ),
        MetricRow(
            "all_events_at_center",
            float(np.max(np.abs(seq.positions() - center))) if count else float("nan"),
            0.0,
            count > 0 and bool(np.all(seq.positions() == center)),
        ),
    ]
    return rows, ("orbit.csv", "events.json")


def _scenario_fig1b(params: dict, out_dir: Path):
    """Four kink-antikink pairs collapsing onto the upper rest state."""
    nl = make_nonlinearity(params["f0"])
    spec = pde_mod.InitialDataSpec(
        kink_positions=tuple(params["kinks"]),
        antikink_positions=tuple(params["antikinks"]),
    )
    field = pde_mod.make_initial_data(
        spec, params["x0"], params["n"], h=params["h"]
    )
    final, log = pde_mod.run(
        field, params["t_end"], params["dt"], nl=nl, cadence=params["cadence"]
    )
    events = positions_mod.detect_events(
        field, log, nl, params["dt"], top_slack=params["top_slack"]
    )

    xs = field.x
    header = ["x"] + [f"u_t{t:g}" for t in log.times]
    cols = [xs] + [np.asarray(s) for s in log.snapshots]
    _write_csv(out_dir / "spacetime.csv", header, np.column_stack(cols))

    snaps = [
        positions_mod.extract_positions(field.with_values(s, t=t))
        for s, t in zip(log.snapshots, log.times)
    ]
    tracks = positions_mod.assemble_tracks(snaps)
    m = tracks.kinks.shape[1]
    nb = tracks.antikinks.shape[1]
    _write_csv(
        out_dir / "positions.csv",
        ["t"]
        + [f"kink_{k+1}" for k in range(m)]
        + [f"antikink_{k+1}" for k in range(nb)],
        np.column_stack([tracks.times, tracks.kinks, tracks.antikinks]),
    )
    _write_json(
        out_dir / "events.json",
        {
            "collisions": [
                {"t": t, "x": x, "index": i} for t, x, i in events.collisions
            ],
            "annihilations": [{"t": t, "index": i} for t, i in events.annihilations],
        },
    )

    ct = [t for t, _, _ in events.collisions]
    at = [t for t, _ in events.annihilations]
    inter = []
    for k in range(min(len(ct), len(at))):
        inter.append(at[k] - ct[k])
        if k + 1 < len(ct):
            inter.append(ct[k + 1] - at[k])
    final_dev = float(np.max(np.abs(np.asarray(final.values) - EIGHT_PI)))
    rows = [
        MetricRow("collision_count", float(len(ct)), 0.0, len(ct) == 4),
        MetricRow("annihilation_count", float(len(at)), 0.0, len(at) == 4),
        MetricRow(
            "collision_annihilation_interleaving",
            float(np.min(inter)) if inter else float("nan"),
            0.0,
            bool(inter) and min(inter) > 0,
        ),
        MetricRow(
            "final_deviation_from_8pi",
            final_dev,
            params["final_tol"],
            final_dev <= params["final_tol"],
        ),
    ]
    return rows, ("spacetime.csv", "positions.csv", "events.json")


def _scenario_fig3(params: dict, out_dir: Path):
    """Five unevenly spaced kinks: spreading, ordering, speed sandwich."""
    nl = make_nonlinearity(params["f0"])
    c = compute_speed(nl)
    spec = pde_mod.InitialDataSpec(kink_positions=tuple(params["kinks"]))
    field = pde_mod.make_initial_data(
        spec, params["x0"], params["n"], h=params["h"], frame="comoving", speed=c
    )
    _, log = pde_mod.run(
        field, params["t_end"], params["dt"], nl=nl, cadence=params["cadence"]
    )
    snaps = [
        positions_mod.extract_positions(field.with_values(s, t=t))
        for s, t in zip(log.snapshots, log.times)
    ]
    tracks = positions_mod.assemble_tracks(snaps)
    d = tracks.distances()

    m = tracks.kinks.shape[1]
    _write_csv(
        out_dir / "positions.csv",
        ["t"] + [f"kink_{k+1}" for k in range(m)],
        np.column_stack([tracks.times, tracks.kinks]),
    )
    _write_csv(
        out_dir / "distances.csv",
        ["t"] + [f"d_{k+1}" for k in range(d.shape[1])],
        np.column_stack([tracks.times, d]),
    )

    bound = float(np.nanmin(d[0]) - params["h"])
    min_margin = float(np.nanmin(d) - bound)
    final_margin = float(np.min(-np.diff(d[-1])))
    sp = tracks.speeds()
    T = len(sp)
    lab = np.nanmean(sp[T // 4 : T // 2], axis=0) + c
    sandwich = float(min(c - np.min(lab), np.max(lab) - c))
    rows = [
        MetricRow("min_distance_above_initial_bound", min_margin, 0.0, min_margin >= 0),
        MetricRow(
            "final_distances_strictly_ordered", final_margin, 0.0, final_margin > 0
        ),
        MetricRow("speed_sandwich_margin", sandwich, 0.0, sandwich > 0),
    ]
    return rows, ("positions.csv", "distances.csv")


def _scenario_washout(params: dict, out_dir: Path):
    """Unequal winding-kink gaps on a circle equalizing over time."""
    nl = make_nonlinearity(params["f0"])
    res = pbvp_mod.washout_experiment(
        nl,
        params["ell"],
        params["kinks"],
        t_end=params["t_end"],
        dt=params["dt"],
        h=params["h"],
        cadence=params["cadence"],
    )
    _write_csv(
        out_dir / "variance.csv",
        ["t", "variance"],
        np.column_stack([res.times, res.variances]),
    )
    ratio = _variance_ratio(float(res.variances[-1]), res.initial_variance)
    v = res.variances
    tail = v[len(v) // 4 :]
    max_rise = float(np.nanmax(np.diff(tail)))
    c = compute_speed(nl)
    _write_json(
        out_dir / "washout.json",
        {
            "drift_speed": res.drift_speed,
            "initial_variance": res.initial_variance,
            "final_variance": float(v[-1]),
            "variance_ratio": ratio,
        },
    )
    rows = [
        MetricRow("variance_ratio", ratio, params["ratio_tol"], ratio < params["ratio_tol"]),
        MetricRow("variance_monotone_after_transient", max_rise, 0.0, max_rise <= 0),
        MetricRow(
            "drift_below_single_kink_speed",
            float(c - res.drift_speed),
            0.0,
            res.drift_speed < c,
        ),
    ]
    return rows, ("variance.csv", "washout.json")


SCENARIO_DEFAULTS = {
    "fig1a": {
        "e": 2,
        "r": 4,
        "n_cells": 201,
        "center": 100,
        "half_gaps": [10, 30, 50, 70],
        "steps": 160,
    },
    "fig1b": {
        "f0": 0.2,
        "h": 0.04,
        "dt": 0.05,
        "t_end": 150.0,
        "x0": -28.0,
        "n": 1401,
        "cadence": 50,
        "kinks": [-2.5, -7.5, -12.5, -17.5],
        "antikinks": [2.5, 7.5, 12.5, 17.5],
        "top_slack": 1e-3,
        "final_tol": 1e-3,
    },
    "fig3": {
        "f0": 0.2,
        "h": 0.04,
        "dt": 0.05,
        "t_end": 1500.0,
        "x0": -42.0,
        "n": 1351,
        "cadence": 100,
        "kinks": [0.0, -5.0, -9.0, -15.0, -23.0],
    },
    "washout": {
        "f0": 0.2,
        "ell": 12.0,
        "kinks": [-8.0, 0.0, 10.0],
        "t_end": 1500.0,
        "dt": 0.1,
        "h": 0.04,
        "cadence": 100,
        "ratio_tol": 0.01,
    },
}

SCENARIO_RUNNERS = {
    "fig1a": _scenario_fig1a,
    "fig1b": _scenario_fig1b,
    "fig3": _scenario_fig3,
    "washout": _scenario_washout,
}


def run_scenario(config: ExperimentConfig) -> Report:
    """Execute one named pipeline; write its artifacts and report.json."""
    if config.scenario not in SCENARIO_RUNNERS:
        known = ", ".join(sorted(SCENARIO_RUNNERS))
        raise ValueError(
            f"unknown scenario '{config.scenario}'; available: {known}"
        )
    params = dict(SCENARIO_DEFAULTS[config.scenario])
    params.update(config.params)
    out_dir = _resolve(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    digest = _config_hash(
        {"scenario": config.scenario, "params": params, "seed": config.seed}
    )
    rows, artifacts = SCENARIO_RUNNERS[config.scenario](params, out_dir)
    report = Report(
        scenario=config.scenario,
        rows=tuple(rows),
        input_hash=digest,
        artifacts=tuple(artifacts),
    )
    payload = report.to_dict()
    payload["params"] = params
    payload["seed"] = config.seed
    _write_json(out_dir / "report.json", payload)
    return report


def _run_scenario_job(name, overrides, out_dir, seed):
    report = run_scenario(
        ExperimentConfig(scenario=name, params=overrides, out_dir=out_dir, seed=seed)
    )
    return name, report


# --- command line ----------------------------------------------------------


@click.group()
def main():
    """Kink dynamics laboratory: PDE, automaton, reductions, comparisons."""


@main.group(name="ghca")
def ghca_grp():
    """Excitable cellular automaton runs."""


@ghca_grp.command(name="run")
@click.option("--e", "e", type=int, default=2, show_default=True)
@click.option("--r", "r", type=int, default=4, show_default=True)
@click.option(
    "--init",
    "init_file",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="Text file with one line of comma-separated integer states.",
)
@click.option("--steps", type=int, required=True)
@click.option("--out", "out", required=True, help="Orbit CSV path.")
@click.option("--events", "events_out", default=None, help="Events JSON path.")
def ghca_run(e, r, init_file, steps, out, events_out):
    """Iterate the automaton and record the orbit and its collisions."""
    rule = ghca_mod.CARule(e=e, r=r)
    line = next(
        ln for ln in Path(init_file).read_text().splitlines() if ln.strip()
    )
    cells = np.array([int(tok) for tok in line.split(",")], dtype=int)
    cfg = ghca_mod.CAConfiguration(cells)
    orbit = ghca_mod.run(rule, cfg, steps)
    seq = ghca_mod.extract_collisions(rule, orbit)
    out = _resolve(out)
    n = cells.size
    _write_csv(
        out,
        ["step"] + [f"c{k:03d}" for k in range(n)],
        [[i] + list(map(int, c.cells)) for i, c in enumerate(orbit)],
    )
    if events_out is None:
        events_out = out.with_name(out.stem + "_events.json")
    _write_json(
        _resolve(events_out),
        [{"p": int(ev.position), "s": int(ev.time)} for ev in seq.events],
    )
    click.echo(f"{len(orbit)} states, {len(seq.events)} collision events")


@main.group(name="front")
def front_grp():
    """Traveling-wave profile of the single interface."""


@front_grp.command(name="compute")
@click.option("--f0", type=float, default=0.2, show_default=True)
@click.option("--h", type=float, default=0.01, show_default=True)
@click.option("--out", "out", required=True, help="JSON path.")
def front_compute(f0, h, out):
    """Solve for the front and store scalars plus sampled profile."""
    nl = make_nonlinearity(f0)
    profile = compute_front(nl, h=h)
    _write_json(
        _resolve(out),
        {
            "c": profile.c,
            "f0": profile.f0,
            "mu": profile.mu,
            "lam": profile.lam,
            "a_plus": profile.a_plus,
            "a_minus": profile.a_minus,
            "capital_lambda": profile.capital_lambda,
            "a_L": profile.a_L,
            "a_R": profile.a_R,
            "z": profile.grid,
            "phi": profile.values,
            "dphi": profile.deriv,
        },
    )
    click.echo(f"c = {profile.c!r}")


@main.group(name="pde")
def pde_grp():
    """Direct field simulations."""


@pde_grp.command(name="run")
@click.option(
    "--config",
    "config_file",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
)
@click.option("--out", "out", required=True, help="Output directory.")
def pde_run(config_file, out):
    """Run a configured field simulation; write snapshots, positions, events."""
    cfg = _load_toml(config_file)
    problems = []
    for key in ("f0", "h", "dt", "t_end", "domain", "initial"):
        if key not in cfg:
            problems.append(f"missing key '{key}'")
    if "domain" in cfg:
        for key in ("x0", "n"):
            if key not in cfg["domain"]:
                problems.append(f"missing key 'domain.{key}'")
    if "initial" in cfg and "kinks" not in cfg["initial"]:
        problems.append("missing key 'initial.kinks'")
    if problems:
        raise click.ClickException("; ".join(problems))

    nl = make_nonlinearity(cfg["f0"])
    frame = cfg.get("frame", "lab")
    boundary = cfg.get("boundary", "neumann")
    init = cfg["initial"]
    spec = pde_mod.InitialDataSpec(
        kink_positions=tuple(init["kinks"]),
        antikink_positions=tuple(init.get("antikinks", ())),
        epsilon=init.get("epsilon"),
        style=init.get("style", "step"),
    )
    speed = compute_speed(nl) if frame == "comoving" else 0.0
    front = compute_front(nl) if spec.style == "front" else None
    field = pde_mod.make_initial_data(
        spec,
        cfg["domain"]["x0"],
        cfg["domain"]["n"],
        h=cfg["h"],
        front=front,
        frame=frame,
        speed=speed,
        boundary=boundary,
        jump=cfg.get("jump", 0),
    )
    cadence = cfg.get("cadence", 50)
    final, log = pde_mod.run(field, cfg["t_end"], cfg["dt"], nl=nl, cadence=cadence)

    out_dir = _resolve(out)
    header = ["x"] + [f"u_t{t:g}" for t in log.times]
    cols = [field.x] + [np.asarray(s) for s in log.snapshots]
    _write_csv(out_dir / "snapshots.csv", header, np.column_stack(cols))

    snaps = [
        positions_mod.extract_positions(field.with_values(s, t=t))
        for s, t in zip(log.snapshots, log.times)
    ]
    tracks = positions_mod.assemble_tracks(snaps)
    m = tracks.kinks.shape[1]
    nb = tracks.antikinks.shape[1]
    _write_csv(
        out_dir / "positions.csv",
        ["t"]
        + [f"kink_{k+1}" for k in range(m)]
        + [f"antikink_{k+1}" for k in range(nb)],
        np.column_stack([tracks.times, tracks.kinks, tracks.antikinks]),
    )
    events = positions_mod.detect_events(
        field, log, nl, cfg["dt"], top_slack=cfg.get("top_slack", 0.0)
    )
    _write_json(
        out_dir / "events.json",
        {
            "collisions": [
                {"t": t, "x": x, "index": i} for t, x, i in events.collisions
            ],
            "annihilations": [{"t": t, "index": i} for t, i in events.annihilations],
        },
    )
    _write_json(
        out_dir / "run.json",
        {
            "config": cfg,
            "config_hash": _config_hash(cfg),
            "final_min": float(np.min(final.values)),
            "final_max": float(np.max(final.values)),
            "frames": len(log.times),
        },
    )
    click.echo(
        f"{len(log.times)} frames, {len(events.collisions)} collisions, "
        f"{len(events.annihilations)} annihilations"
    )


@main.group(name="ode")
def ode_grp():
    """Reduced interaction dynamics."""


@ode_grp.command(name="run")
@click.option(
    "--system",
    type=click.Choice(["eta", "normalized"]),
    required=True,
)
@click.option("--n", "n", type=int, required=True)
@click.option("--init", "init_str", required=True, help="Comma-separated values.")
@click.option("--t-end", "t_end", type=float, required=True)
@click.option("--f0", type=float, default=0.2, show_default=True)
@click.option("--epsilon", type=float, default=0.5, show_default=True)
@click.option("--samples", type=int, default=500, show_default=True)
@click.option("--out", "out", required=True, help="Trajectory CSV path.")
def ode_run(system, n, init_str, t_end, f0, epsilon, samples, out):
    """Integrate the position system or its normalized-distance form."""
    init = [float(tok) for tok in init_str.split(",")]
    if len(init) != n:
        raise click.ClickException(f"--init has {len(init)} values, expected n={n}")
    t_eval = np.linspace(0.0, t_end, samples + 1)
    if system == "eta":
        nl = make_nonlinearity(f0)
        profile = compute_front(nl)
        sys_ = reduced_ode.ReducedSystem(
            n, profile.a_L, profile.a_R, profile.mu, profile.lam
        )
        traj = reduced_ode.integrate_eta(sys_, init, t_end, t_eval=t_eval)
        names = [f"eta_{k+1}" for k in range(n)]
    else:
        nd = reduced_ode.NormalizedDistances(tuple(init), epsilon=epsilon)
        traj = reduced_ode.integrate_normalized(nd, t_end, t_eval=t_eval)
        names = [f"delta_{k+1}" for k in range(n)]
    _write_csv(
        _resolve(out), ["t"] + names, np.column_stack([traj.t, traj.y.T])
    )
    if not traj.complete:
        click.echo(f"warning: {traj.message}", err=True)
    click.echo(f"{traj.t.size} samples, complete={traj.complete}")


@main.group(name="blowup")
def blowup_grp():
    """Rescaled distance dynamics on the sphere at infinity."""


@blowup_grp.command(name="census")
@click.option("--n", "n", type=int, required=True)
@click.option("--out", "out", required=True, help="JSON path.")
def blowup_census(n, out):
    """Enumerate all equilibria with their stability data."""
    eqs = blowup_mod.enumerate_equilibria(n, with_eigenvalues=True)
    _write_json(
        _resolve(out),
        [
            {
                "psi": e.psi,
                "zero_pattern": [bool(z) for z in e.zero_pattern],
                "sigma": e.sigma_value,
                "tangential_eigenvalues": sorted(
                    float(np.real(v)) for v in np.atleast_1d(e.tangential_eigenvalues)
                ),
                "transverse_eigenvalue": float(np.real(e.transverse_eigenvalue)),
            }
            for e in eqs
        ],
    )
    click.echo(f"{len(eqs)} equilibria")


@blowup_grp.command(name="eig")
@click.option("--n", "n", type=int, required=True)
@click.option("--out", "out", default=None, help="Optional JSON path.")
def blowup_eig(n, out):
    """Spectrum at the fully symmetric equilibrium."""
    tangential, transverse = blowup_mod.eigenvalues_at_E(n)
    payload = {
        "n": n,
        "tangential": sorted(float(np.real(v)) for v in np.atleast_1d(tangential)),
        "transverse": float(np.real(transverse)),
    }
    if out is not None:
        _write_json(_resolve(out), payload)
    click.echo(json.dumps(_jsonable(payload), sort_keys=True))


@main.group(name="pbvp")
def pbvp_grp():
    """Periodic traveling-wave boundary value problem."""


@pbvp_grp.command(name="solve")
@click.option("--f0", type=float, default=0.2, show_default=True)
@click.option("--ell", type=float, required=True)
@click.option("--j", "j", type=int, required=True)
@click.option("--h", type=float, default=None)
@click.option("--out", "out", required=True, help="JSON path.")
def pbvp_solve(f0, ell, j, h, out):
    """Solve for the speed and profile on the periodic cell."""
    nl = make_nonlinearity(f0)
    sol = pbvp_mod.solve_speed(nl, ell, j, h=h)
    _write_json(
        _resolve(out),
        {
            "ell": sol.ell,
            "j": sol.j,
            "a": sol.a,
            "h": sol.h,
            "energy_residual": sol.energy_residual(nl),
            "z": sol.grid,
            "u": sol.profile,
        },
    )
    click.echo(f"a = {sol.a!r}")


@pbvp_grp.command(name="washout")
@click.option(
    "--config",
    "config_file",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
)
@click.option("--out", "out", default="washout", show_default=True)
def pbvp_washout(config_file, out):
    """Run the configured gap-equalization experiment."""
    cfg = _load_toml(config_file)
    missing = [k for k in ("f0", "ell", "kinks", "t_end") if k not in cfg]
    if missing:
        raise click.ClickException(
            "; ".join(f"missing key '{k}'" for k in missing)
        )
    nl = make_nonlinearity(cfg["f0"])
    res = pbvp_mod.washout_experiment(
        nl,
        cfg["ell"],
        cfg["kinks"],
        t_end=cfg["t_end"],
        dt=cfg.get("dt", 0.1),
        h=cfg.get("h", 0.04),
        cadence=cfg.get("cadence", 100),
        epsilon=cfg.get("epsilon"),
    )
    out_dir = _resolve(out)
    _write_csv(
        out_dir / "variance.csv",
        ["t", "variance"],
        np.column_stack([res.times, res.variances]),
    )
    _write_json(
        out_dir / "washout.json",
        {
            "config": cfg,
            "config_hash": _config_hash(cfg),
            "drift_speed": res.drift_speed,
            "initial_variance": res.initial_variance,
            "final_variance": float(res.variances[-1]),
        },
    )
    ratio = _variance_ratio(float(res.variances[-1]), res.initial_variance)
    click.echo(f"final/initial variance = {ratio!r}")


@main.group(name="scenario")
def scenario_grp():
    """Named figure-regeneration pipelines with pass/fail reports."""


@scenario_grp.command(name="list")
def scenario_list():
    """Show the available scenario names."""
    for name in sorted(SCENARIO_RUNNERS):
        click.echo(name)


@scenario_grp.command(name="run")
@click.argument("names", nargs=-1, required=True)
@click.option(
    "--config",
    "config_file",
    default=None,
    type=click.Path(exists=True, dir_okay=False),
    help="TOML file with per-scenario override tables.",
)
@click.option("--out", "out", default=".", show_default=True, help="Output root.")
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=None)
def scenario_run(names, config_file, out, jobs, seed):
    """Run one or more scenarios; exit 0 iff every metric row passes."""
    overrides = _load_toml(config_file) if config_file else {}
    unknown = [n for n in names if n not in SCENARIO_RUNNERS]
    if unknown:
        known = ", ".join(sorted(SCENARIO_RUNNERS))
        raise click.ClickException(
            f"unknown scenario(s) {', '.join(unknown)}; available: {known}"
        )
    jobs = max(1, min(jobs, len(names)))
    results = []
    if jobs == 1:
        for name in names:
            results.append(
                _run_scenario_job(
                    name, overrides.get(name, {}), Path(out) / name, seed
                )
            )
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(
                    _run_scenario_job,
                    name,
                    overrides.get(name, {}),
                    Path(out) / name,
                    seed,
                )
                for name in names
            ]
            results = [f.result() for f in futures]
    ok = True
    for name, report in results:
        click.echo(f"--- {name} ---")
        _echo_rows(report.rows)
        ok = ok and report.all_pass()
    sys.exit(0 if ok else 1)


@main.group(name="compare")
def compare_grp():
    """Cross-model comparison pipelines."""


@compare_grp.command(name="collisions")
@click.option(
    "--ghca",
    "ghca_file",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="JSON list of {p, s} events.",
)
@click.option(
    "--pde",
    "pde_file",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="Events JSON from a field run.",
)
@click.option("--map-x0", type=float, default=0.0, show_default=True)
@click.option("--map-dx", type=float, default=1.0, show_default=True)
@click.option("--tol-x", type=float, default=None)
@click.option("--tol-t", type=float, default=None)
@click.option("--out", "out", default=None, help="Report JSON path.")
def compare_collisions(ghca_file, pde_file, map_x0, map_dx, tol_x, tol_t, out):
    """Fit the time scale between the two event sequences and diff them."""
    ghca_events = json.loads(Path(ghca_file).read_text(encoding="utf-8"))
    pde_payload = json.loads(Path(pde_file).read_text(encoding="utf-8"))
    if isinstance(pde_payload, dict):
        pde_events = pde_payload.get("collisions", [])
    else:
        pde_events = pde_payload
    result = compare_collision_sequences(
        ghca_events, pde_events, map_x0=map_x0, map_dx=map_dx, tol_x=tol_x, tol_t=tol_t
    )
    rows = result.pop("rows")
    if out is not None:
        payload = dict(result)
        payload["metrics"] = [
            {
                "name": r.name,
                "value": r.value,
                "tolerance": r.tolerance,
                "passed": bool(r.passed),
            }
            for r in rows
        ]
        _write_json(_resolve(out), payload)
    _echo_rows(rows)
    sys.exit(0 if all(r.passed for r in rows) else 1)


def _read_csv_column(path, col):
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")
    if col not in header:
        raise click.ClickException(f"column '{col}' not in {path} ({header})")
    idx = header.index(col)
    t, v = [], []
    for ln in lines[1:]:
        if not ln.strip():
            continue
        parts = ln.split(",")
        cell = parts[idx]
        t.append(float(parts[0]))
        v.append(float(cell) if cell else float("nan"))
    return np.array(t), np.array(v)


@compare_grp.command(name="distances")
@click.option(
    "--pde",
    "pde_file",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="CSV with a time column first.",
)
@click.option("--pde-col", required=True)
@click.option(
    "--ode",
    "ode_file",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
)
@click.option("--ode-col", required=True)
@click.option("--window", nargs=2, type=float, default=None)
@click.option("--tol", type=float, default=0.05, show_default=True)
@click.option("--out", "out", default=None, help="Report JSON path.")
def compare_distances(pde_file, pde_col, ode_file, ode_col, window, tol, out):
    """Relative deviation between two distance-versus-time curves."""
    t_pde, d_pde = _read_csv_column(pde_file, pde_col)
    t_ode, d_ode = _read_csv_column(ode_file, ode_col)
    keep = np.isfinite(d_pde)
    report = reduced_ode.compare_pde_ode(
        t_pde[keep], d_pde[keep], t_ode, d_ode, window=window
    )
    rows = [
        MetricRow(
            "max_relative_deviation",
            report.max_rel_error,
            tol,
            report.max_rel_error <= tol,
        ),
        MetricRow("decay_rate_first", report.rate_first, None, True),
        MetricRow("decay_rate_second", report.rate_second, None, True),
    ]
    if out is not None:
        _write_json(
            _resolve(out),
            {
                "max_relative_deviation": report.max_rel_error,
                "rate_first": report.rate_first,
                "rate_second": report.rate_second,
                "window": list(report.window),
                "n_samples": report.n_samples,
                "metrics": [
                    {
                        "name": r.name,
                        "value": r.value,
                        "tolerance": r.tolerance,
                        "passed": bool(r.passed),
                    }
                    for r in rows
                ],
            },
        )
    _echo_rows(rows)
    sys.exit(0 if all(r.passed for r in rows) else 1)


if __name__ == "__main__":
    main()
