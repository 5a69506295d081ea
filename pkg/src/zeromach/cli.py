"""Command-line front end: run scenarios, studies and the check battery.

Exit codes: 0 ok, 2 configuration error, 3 solver error, 4 check failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys
from importlib import metadata
from pathlib import Path

import numpy as np

from .eos import GammaGas, GasState, InadmissiblePressure, TaitLiquid
from .godunov import CFLViolation, cell_pressures, godunov_run, initial_cells, make_mesh
from .limit import evolve, make_limit_state
from .metrics import convergence_study, eps_rule_from_name
from .riemann import NonConvergence, VacuumError, solve_riemann
from .scenarios import ConfigError, Scenario, load_scenario
from .wft import DomainViolation, FrontCapExceeded, FrontField, TVBlowUp

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_CHECK = 0, 2, 3, 4
OUT_ENV = "ZEROMACH_OUT"
SOLVER_ERRORS = (
    VacuumError,
    NonConvergence,
    InadmissiblePressure,
    FrontCapExceeded,
    TVBlowUp,
    DomainViolation,
    CFLViolation,
)
CSV_HEADER = ("t", "z", "p", "v", "tau", "region")


def fmt(x) -> str:
    """17 significant digits, enough to round-trip a double."""
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def write_json(path: Path, data) -> None:
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def versions() -> dict:
    try:
        pkg = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        pkg = "unknown"
    return {"python": platform.python_version(), "numpy": np.__version__, "artifact": pkg}


def write_manifest(out: Path, sub: str, sc: Scenario | None, summary: dict, config: dict | None = None) -> None:
    data = {"subcommand": sub, "versions": versions(), "summary": summary}
    if sc is not None:
        data.update(scenario=sc.name, config_hash=sc.config_hash(), config=sc.to_dict())
    elif config is not None:
        data.update(config=config)
    write_json(out / "manifest.json", data)


# --- CSV emission ------------------------------------------------------------------


def front_field_rows(ff: FrontField, t: float, lo: float, hi: float):
    """One row per constant piece of ``(p, v, tau)`` inside ``[lo, hi]``."""
    pv = ff.solution_at()
    cuts = np.unique(np.concatenate([pv.breakpoints, ff.interfaces()]))
    cuts = cuts[(cuts > lo) & (cuts < hi)]
    starts = np.concatenate([[lo], cuts])
    ends = np.concatenate([cuts, [hi]])
    for a, b in zip(starts, ends):
        mid = 0.5 * (a + b)
        p, v = pv(mid)
        region = ff.region_at(mid)
        yield (t, a, p, v, region.law.tau(p), csv_region(region.name, mid))


def csv_region(name: str, z: float) -> str:
    """Pure-gas runs label the two sides of the origin like the two-fluid columns."""
    if name == "gas":
        return "gas_left" if z < 0.0 else "gas_right"
    return name


def write_rows(path: Path, rows) -> int:
    n = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for row in rows:
            w.writerow([fmt(x) for x in row])
            n += 1
    return n


def _window(sc: Scenario, t: float, lam: float) -> tuple[float, float]:
    reach = sc.support_radius + lam * t + 1.0
    return -reach, sc.m + reach


def _gas_speed(sc: Scenario) -> float:
    gas = sc.gas_law()
    return max(gas.char_speed(p) for p in sc.datum().values[:, 0])


def _times(sc: Scenario, args) -> list[float]:
    if args.snapshots:
        return sorted(float(x) for x in args.snapshots.split(","))
    return sorted(set(sc.snapshots) | {sc.t_end})


# --- subcommands -------------------------------------------------------------------


def cmd_simulate(sc: Scenario, args, out: Path) -> tuple[int, dict]:
    ff = sc.front_field(keep_log=True)
    lam = _gas_speed(sc)
    rows = []
    for t in _times(sc, args):
        ff.advance(t)
        rows.extend(front_field_rows(ff, t, *_window(sc, t, lam)))
    write_rows(out / "snapshots.csv", rows)
    ff.write_log(out / "events.jsonl")
    summary = {
        "t": ff.t,
        "fronts": len(ff),
        "events": ff.n_events,
        "tv_initial": ff.tv0,
        "tv_final": ff.tv,
        "potential": ff.potential(),
    }
    return EXIT_OK, summary


def cmd_godunov(sc: Scenario, args, out: Path) -> tuple[int, dict]:
    dz = args.dz or sc.dz
    times = _times(sc, args)
    lam = _gas_speed(sc)
    mesh = make_mesh(dz, sc.support_radius + lam * max(times) + 2 * dz, sc.gas_law(), sc.liquid_law(), sc.m)
    snaps = godunov_run(initial_cells(sc.datum(), mesh), mesh, max(times), times)
    names = mesh.region_names()
    rows = []
    for t in times:
        u = snaps[t]
        p = cell_pressures(u, mesh)
        rows.extend(zip([t] * mesh.n_cells, mesh.centers, p, u[:, 1], u[:, 0], names))
    write_rows(out / "snapshots.csv", rows)
    return EXIT_OK, {"cells": mesh.n_cells, "dz": dz, "times": times}


def cmd_limit(sc: Scenario, args, out: Path) -> tuple[int, dict]:
    if sc.liquid is None:
        raise ConfigError("liquid", "the limit system needs a liquid slab")
    state = make_limit_state(sc.datum(), sc.gas_law(), sc.m, sc.initial_liquid_velocity(), sc.epsilon(), delta=sc.delta)
    lam = _gas_speed(sc)
    rows = []
    for t in _times(sc, args):
        state = evolve(state, t, sc.h, h_max=max(sc.h, 1e-2))
        lo, hi = _window(sc, t, lam)
        rows.extend(front_field_rows(state.left, t, lo, 0.0))
        rows.extend(front_field_rows(state.right, t, sc.m, hi))
    write_rows(out / "snapshots.csv", rows)
    with open(out / "trajectory.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(("t", "v_l", "p_left", "p_right"))
        w.writerow([fmt(0.0), fmt(sc.initial_liquid_velocity()), "", ""])
        for rec in state.history:
            w.writerow([fmt(rec.t), fmt(rec.v_l), fmt(rec.p_left), fmt(rec.p_right)])
    return EXIT_OK, {"t": state.t, "v_l": state.v_l, "steps": len(state.history)}


def riemann_from_config(cfg: dict) -> dict:
    """One-shot solve; ``cfg`` holds ``left``/``right`` with ``p``, ``v``, ``law``."""
    try:
        gas = GammaGas(**cfg.get("gas", {}))
        liquid = TaitLiquid(**cfg.get("liquid", {}))
        laws = {"gas": gas, "liquid": liquid}
        sides = []
        for name in ("left", "right"):
            if name not in cfg:
                raise ConfigError(name, "required field is missing")
            side = cfg[name]
            law = side.get("law", "gas")
            if law not in laws:
                raise ConfigError(f"{name}.law", f"unknown law {law!r}")
            sides.append((GasState(float(side["p"]), float(side["v"])), laws[law]))
    except KeyError as exc:
        raise ConfigError(str(exc.args[0]), "required field is missing") from None
    except TypeError as exc:
        raise ConfigError("gas/liquid", str(exc)) from None
    (left, law_l), (right, law_r) = sides
    return solve_riemann(left, law_l, right, law_r).as_dict()


def cmd_riemann(cfg: dict, args, out: Path) -> tuple[int, dict]:
    result = riemann_from_config(cfg)
    write_json(out / "riemann.json", result)
    if not args.quiet:
        print(json.dumps(_jsonable(result), indent=2))
    return EXIT_OK, result


def cmd_converge(sc: Scenario, args, out: Path) -> tuple[int, dict]:
    if sc.liquid is None:
        raise ConfigError("liquid", "the convergence study needs a liquid slab")
    kappas = [float(k) for k in args.kappa_list.split(",")] if args.kappa_list else [0.2, 0.1, 0.05]
    rule = args.eps_rule or sc.eps_rule
    eps_rule_from_name(rule)
    times = [float(x) for x in args.snapshots.split(",")] if args.snapshots else [sc.t_end]
    study = convergence_study(
        sc.datum(), sc.gas_law(), sc.liquid_law(), sc.m, kappas, rule, times=times, h=sc.h, delta=sc.delta
    )
    with open(out / "table.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(study.COLUMNS)
        for row in study.rows:
            w.writerow([fmt(row[c]) for c in study.COLUMNS])
    write_json(out / "fit.json", study.fit)
    return EXIT_OK, {"fit": study.fit, "rows": len(study.rows)}


def cmd_check(args, out: Path) -> tuple[int, dict]:
    from .acceptance import run_battery

    results = run_battery(quick=not args.full)
    for r in results:
        if not args.quiet:
            print(r.line())
    summary = {
        str(r.number): {"title": r.title, "passed": r.passed, "values": r.values, "elapsed": r.elapsed}
        for r in results
    }
    write_json(out / "check.json", summary)
    return (EXIT_OK if all(r.passed for r in results) else EXIT_CHECK), summary


# --- entry point -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zeromach", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="JSON file or built-in name (G1, C1, L1, R1)")
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV}/<command>-<name>)")
        p.add_argument("--quiet", action="store_true")
        return p

    common(sub.add_parser("simulate", help="front tracking run")).add_argument("--snapshots")
    g = common(sub.add_parser("godunov", help="finite-volume reference run"))
    g.add_argument("--snapshots")
    g.add_argument("--dz", type=float)
    common(sub.add_parser("limit", help="incompressible-limit run")).add_argument("--snapshots")
    common(sub.add_parser("riemann", help="one Riemann problem"))
    c = common(sub.add_parser("converge", help="compressible-to-limit convergence study"))
    c.add_argument("--kappa-list")
    c.add_argument("--eps-rule", help="kappa_sq or fixed:<value>")
    c.add_argument("--snapshots", help="comparison times")
    k = common(sub.add_parser("check", help="acceptance battery"), config_required=False)
    k.add_argument("--full", action="store_true", help="full-scale criteria instead of the reduced battery")
    return parser


def _out_dir(args, name: str) -> Path:
    if args.out:
        out = Path(args.out)
    else:
        out = Path(os.environ.get(OUT_ENV, "runs")) / f"{args.command}-{name}"
    out.mkdir(parents=True, exist_ok=True)
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    name = "battery"
    try:
        if args.command == "check":
            out = _out_dir(args, name)
            code, summary = cmd_check(args, out)
            write_manifest(out, "check", None, {"passed": code == EXIT_OK})
            return code
        if args.command == "riemann":
            cfg = _read_json(args.config)
            out = _out_dir(args, Path(args.config).stem)
            code, summary = cmd_riemann(cfg, args, out)
            write_manifest(out, "riemann", None, summary, config=cfg)
            return code
        sc = load_scenario(args.config)
        name = sc.name
        out = _out_dir(args, name)
        handler = {"simulate": cmd_simulate, "godunov": cmd_godunov, "limit": cmd_limit, "converge": cmd_converge}
        code, summary = handler[args.command](sc, args, out)
        write_manifest(out, args.command, sc, summary)
        if not args.quiet:
            print(f"{args.command} {name}: wrote {out}")
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SOLVER_ERRORS as exc:
        print(f"solver error in {args.command} {name}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def _read_json(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None


if __name__ == "__main__":
    sys.exit(main())
