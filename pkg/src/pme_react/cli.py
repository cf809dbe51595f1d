"""Command line front end.

Subcommands, all driven by one config file (see :mod:`pme_react.config`):

* ``feasibility``: run or search the closed-form conditions, write
  ``summary.json``.
* ``barrier-check``: feasibility plus the residual sign sweep and the
  derivative cross-check, write ``verdict.json``.
* ``simulate``: run the scheme, write ``series.csv``, ``snapshots.csv``
  and ``summary.json``; works without a barrier section.
* ``compare``: run the scheme against the barrier prediction, write the
  series/snapshot files and ``verdict.json``.
* ``blow-up-scan``: the blow-up comparison plus reruns with scaled initial
  data, adding ``scan.csv``.

Exit status: 0 when the requested check passed (or the simulation
terminated normally), 2 when it failed, was infeasible or inconclusive,
1 for usage and config errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional, Sequence

import numpy as np

from . import config as config_mod
from .feasibility import (
    REGIME_BLOWUP,
    FeasibilitySearchError,
    check_auto,
)
from .harness import (
    VERDICT_PASS,
    blowup_scan,
    comparison_experiment,
    derivative_crosscheck,
    residual_sweep,
    run_scenario,
)
from .solver import RadialGrid, RunResult, run

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAIL = 2

SCAN_FACTORS = (0.25, 0.5, 0.75, 1.0, 1.25)


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; our contract reserves 2 for
    # semantic failures, so remap
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(payload, indent=2, sort_keys=True))
        fh.write("\n")


def _write_series(path: str, res: RunResult) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,sup_norm,support_radius\n")
        for t, s, r in zip(res.times, res.sup_series, res.support_series):
            fh.write(f"{_fmt(t)},{_fmt(s)},{_fmt(r)}\n")


def _write_snapshots(path: str, res: RunResult, grid: RadialGrid) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,r,u\n")
        for t, u in res.snapshots:
            for r, v in zip(grid.centers, u):
                fh.write(f"{_fmt(t)},{_fmt(r)},{_fmt(v)}\n")


def _write_scan(path: str, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("factor,blowup,s_num,tau0\n")
        for row in rows:
            s_num = _fmt(row.s_num) if row.s_num is not None else ""
            tau0 = _fmt(row.tau0) if row.tau0 is not None else ""
            fh.write(f"{_fmt(row.factor)},{str(row.blew_up).lower()},{s_num},{tau0}\n")


def _run_summary(res: RunResult) -> dict:
    return {
        "termination": res.termination,
        "steps": res.steps,
        "final_time": res.final_state.t,
        "final_sup": float(res.final_state.u.max()),
        "s_num": res.blowup.s_num if res.blowup is not None else None,
        "blowup_flag": res.blowup.flag if res.blowup is not None else None,
        "tau0": res.tau0,
        "clamp_total": res.clamp_total,
        "cells": res.grid.cells,
        "R": res.grid.R,
        "t_end": res.config.t_end,
    }


def _load(args) -> config_mod.Resolved:
    loaded = config_mod.load(args.config)
    if getattr(args, "seed", None) is not None:
        loaded.seed = args.seed
    return config_mod.resolve(loaded)


def _need_regime(resolved: config_mod.Resolved, command: str) -> None:
    if resolved.regime is None or resolved.barrier is None:
        raise ValueError(f"'{command}' needs a [barrier] section with a regime")


def _cmd_feasibility(args) -> int:
    try:
        resolved = _load(args)
        _need_regime(resolved, "feasibility")
    except FeasibilitySearchError as exc:
        _write_json(
            os.path.join(args.out, "summary.json"),
            {"feasible": False, "error": str(exc)},
        )
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_FAIL
    report = resolved.report
    if report is None:
        report = check_auto(resolved.barrier, resolved.density)
    payload = report.to_jsonable()
    payload["defaults_used"] = resolved.defaults_used
    _write_json(os.path.join(args.out, "summary.json"), payload)
    print(f"{report.mode}: {'feasible' if report.overall else 'infeasible'} "
          f"({report.condition_set} conditions)")
    return EXIT_OK if report.overall else EXIT_FAIL


def _cmd_barrier_check(args) -> int:
    try:
        resolved = _load(args)
        _need_regime(resolved, "barrier-check")
    except FeasibilitySearchError as exc:
        _write_json(os.path.join(args.out, "verdict.json"), {"passed": False, "error": str(exc)})
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_FAIL
    bar, dens = resolved.barrier, resolved.density
    report = resolved.report if resolved.report is not None else check_auto(bar, dens)
    sweep = residual_sweep(bar, dens, resolved.regime)
    cross = derivative_crosscheck(bar, seed=resolved.seed)
    passed = bool(report.overall and sweep.passed and cross.passed)
    _write_json(
        os.path.join(args.out, "verdict.json"),
        {
            "passed": passed,
            "feasibility": report.to_jsonable(),
            "residual_sweep": sweep.to_jsonable(),
            "derivative_crosscheck": cross.to_jsonable(),
            "defaults_used": resolved.defaults_used,
        },
    )
    print(f"barrier-check: {'pass' if passed else 'fail'} "
          f"(feasible={report.overall}, sweep={sweep.passed}, derivatives={cross.passed})")
    return EXIT_OK if passed else EXIT_FAIL


def _cmd_simulate(args) -> int:
    resolved = _load(args)
    if resolved.barrier is not None:
        res = run_scenario(resolved.scenario())
    else:
        grid = RadialGrid(N=resolved.constants.N, R=resolved.solver.R, cells=resolved.solver.cells)
        if resolved.initial.kind == "constant":
            u0 = np.full(grid.cells, resolved.initial.value)
        else:
            u0 = np.loadtxt(resolved.initial.path, delimiter=",", dtype=float).ravel()
        res = run(u0, grid, resolved.density, resolved.constants, resolved.solver)
    grid = res.grid
    _write_series(os.path.join(args.out, "series.csv"), res)
    _write_snapshots(os.path.join(args.out, "snapshots.csv"), res, grid)
    payload = _run_summary(res)
    payload["defaults_used"] = resolved.defaults_used
    _write_json(os.path.join(args.out, "summary.json"), payload)
    ok = res.termination in ("completed", "blowup")
    print(f"simulate: {res.termination} at t={res.final_state.t:.6g} "
          f"(sup={float(res.final_state.u.max()):.6g}, steps={res.steps})")
    return EXIT_OK if ok else EXIT_FAIL


def _cmd_compare(args) -> int:
    try:
        resolved = _load(args)
        _need_regime(resolved, "compare")
    except FeasibilitySearchError as exc:
        _write_json(os.path.join(args.out, "verdict.json"), {"verdict": "fail", "error": str(exc)})
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_FAIL
    result = comparison_experiment(resolved.scenario())
    _write_series(os.path.join(args.out, "series.csv"), result.run)
    _write_snapshots(os.path.join(args.out, "snapshots.csv"), result.run, result.run.grid)
    payload = result.to_jsonable()
    payload["defaults_used"] = resolved.defaults_used
    _write_json(os.path.join(args.out, "verdict.json"), payload)
    print(f"compare[{result.regime}]: {result.verdict} "
          f"(termination={result.termination}, max_violation={result.max_violation:.3e})")
    return EXIT_OK if result.verdict == VERDICT_PASS else EXIT_FAIL


def _cmd_scan(args) -> int:
    try:
        resolved = _load(args)
        _need_regime(resolved, "blow-up-scan")
    except FeasibilitySearchError as exc:
        _write_json(os.path.join(args.out, "verdict.json"), {"verdict": "fail", "error": str(exc)})
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if resolved.regime != REGIME_BLOWUP:
        raise ValueError("'blow-up-scan' needs the blow-up regime")
    scenario = resolved.scenario()
    result = comparison_experiment(scenario)
    rows = blowup_scan(scenario, factors=SCAN_FACTORS, workers=args.workers)
    _write_series(os.path.join(args.out, "series.csv"), result.run)
    _write_snapshots(os.path.join(args.out, "snapshots.csv"), result.run, result.run.grid)
    _write_scan(os.path.join(args.out, "scan.csv"), rows)
    payload = result.to_jsonable()
    payload["scan"] = [row.to_jsonable() for row in rows]
    payload["defaults_used"] = resolved.defaults_used
    _write_json(os.path.join(args.out, "verdict.json"), payload)
    blew = sum(1 for row in rows if row.blew_up)
    print(f"blow-up-scan: compare {result.verdict}; {blew}/{len(rows)} scaled runs blew up")
    return EXIT_OK if result.verdict == VERDICT_PASS else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pme-react", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    specs = (
        ("feasibility", _cmd_feasibility, "evaluate or search the closed-form conditions"),
        ("barrier-check", _cmd_barrier_check, "feasibility plus residual and derivative checks"),
        ("simulate", _cmd_simulate, "run the scheme and write series/snapshots"),
        ("compare", _cmd_compare, "run the scheme against the barrier prediction"),
        ("blow-up-scan", _cmd_scan, "compare, then rerun with scaled initial data"),
    )
    for name, fn, help_text in specs:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the config file")
        p.add_argument("--out", required=True, help="output directory (created if absent)")
        p.add_argument("--seed", type=int, default=None, help="override the harness seed")
        if name == "blow-up-scan":
            p.add_argument("--workers", type=int, default=0, help="parallel scan processes")
        p.set_defaults(fn=fn)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        os.makedirs(args.out, exist_ok=True)
        return args.fn(args)
    except config_mod.ConfigError as exc:
        print(f"config error(s) in {args.config}:", file=sys.stderr)
        for issue in exc.issues:
            print(f"  {issue}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
