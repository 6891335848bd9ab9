"""Command-line interface.

Subcommands::

    damc complete  --input u.data --solver l0 --ratio 0.2 --seed 0 --out runs/
    damc benchmark --plan plan.json --out bench/
    damc synth     --rows 50 --cols 50 --rank 2 --alphabet 1,2,3,4,5 --seed 7 --out m.csv

Exit codes: 0 success, 1 configuration error, 2 data error, 3 numeric
failure.  Set ``DAMC_LOG`` (DEBUG/INFO/WARNING/ERROR) to control verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

from .benchmark import (
    load_dataset,
    load_plan,
    run_benchmark,
    write_summary_json,
    write_traces_csv,
    CellResult,
)
from .data import RATING_ALPHABET, SplitSpec, split, synth_discrete_lowrank, write_matrix_csv
from .errors import ConfigError, DataError, MetricError, NumericError
from .metrics import alphabet_project, nmse
from .regularizer import Alphabet
from .solvers import GroundTruth, SolverConfig, SOLVER_NAMES, run_solver

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad flags; route through ConfigError
    # so all configuration problems share exit code 1
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="damc", description="Discrete-aware low-rank matrix completion")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("complete", parents=[], help="run one solver on one split")
    c.add_argument("--input", required=True,
                   help="ratings file (tab-separated) or matrix CSV (*.csv)")
    c.add_argument("--solver", required=True, choices=SOLVER_NAMES)
    c.add_argument("--ratio", type=float, required=True, help="observed fraction of known entries")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--alpha", type=float, default=0.1)
    c.add_argument("--lambda", dest="lam", type=float, default=10.0)
    c.add_argument("--zeta", type=float, default=0.15)
    c.add_argument("--max-inner", type=int, default=500)
    c.add_argument("--max-outer", type=int, default=20)
    c.add_argument("--inner-tol", type=float, default=1e-4)
    c.add_argument("--outer-tol", type=float, default=1e-3)
    c.add_argument("--mu", dest="mu_override", type=float, default=None,
                   help="override the Lipschitz-derived gradient step")
    c.add_argument("--lipschitz-rule", choices=("paper", "classical"), default="paper")
    c.add_argument("--alphabet", default="1,2,3,4,5", help="comma-separated letters")
    c.add_argument("--out", required=True, help="output directory")
    c.add_argument("--no-plots", action="store_true", help="skip figure rendering")

    b = sub.add_parser("benchmark", help="run a solver/ratio/seed grid from a JSON plan")
    b.add_argument("--plan", required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--no-plots", action="store_true")

    s = sub.add_parser("synth", help="generate a quantized low-rank matrix CSV")
    s.add_argument("--rows", type=int, required=True)
    s.add_argument("--cols", type=int, required=True)
    s.add_argument("--rank", type=int, required=True)
    s.add_argument("--alphabet", default="1,2,3,4,5")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help="output CSV path")
    return p


def _load_input(path: str, alphabet: Alphabet):
    from .benchmark import load_dataset as _ld

    kind = "csv" if path.lower().endswith(".csv") else "movielens"
    spec = {"kind": kind, "path": path}
    if kind == "csv":
        spec["alphabet"] = alphabet.values.tolist()
        ds, _ = _ld(spec)
        return ds
    ds, _ = _ld(spec)
    return ds


def _cmd_complete(args) -> int:
    try:
        alphabet = Alphabet.from_string(args.alphabet)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    cfg = SolverConfig(
        lam=args.lam, zeta=args.zeta, alpha=args.alpha,
        max_inner_iters=args.max_inner, max_outer_iters=args.max_outer,
        inner_tol=args.inner_tol, outer_tol=args.outer_tol, seed=args.seed,
        mu_override=args.mu_override, lipschitz_rule=args.lipschitz_rule,
    )
    ds = _load_input(args.input, alphabet)
    omega_train, omega_test = split(ds, SplitSpec(args.ratio, args.seed))
    gt = GroundTruth(ds.O, omega_test) if len(omega_test) > 0 else None
    log.info("running %s on %dx%d matrix, |observed|=%d",
             args.solver, ds.O.shape[0], ds.O.shape[1], len(omega_train))
    tic = time.perf_counter()
    run = run_solver(args.solver, ds.O, omega_train, alphabet, cfg, gt)
    wall_ms = (time.perf_counter() - tic) * 1e3

    os.makedirs(args.out, exist_ok=True)
    cell = CellResult(args.solver, args.ratio, args.seed, "ok",
                      converged=run.converged, outer_iters=run.iterations_used[0],
                      inner_iters=run.iterations_used[1], wall_ms=wall_ms, trace=run.trace)
    if gt is not None:
        cell.nmse_raw = nmse(run.final_X, ds.O, omega_test)
        projected = alphabet_project(run.final_X, alphabet, omega_test)
        cell.nmse_projected = nmse(projected, ds.O, omega_test)
    write_traces_csv([cell], os.path.join(args.out, "trace.csv"))
    summary = cell.summary()
    summary["trace_file"] = "trace.csv"
    summary["warnings"] = list(run.warnings)
    with open(os.path.join(args.out, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    write_matrix_csv(os.path.join(args.out, "completed.csv"), run.final_X)
    if not args.no_plots:
        from .plots import save_run_figure

        save_run_figure(run.trace, os.path.join(args.out, "convergence.png"),
                        title=f"{args.solver}, ratio {args.ratio:g}, seed {args.seed}")
    print(f"{args.solver}: nmse_raw={cell.nmse_raw:.6g} nmse_projected={cell.nmse_projected:.6g} "
          f"iterations={run.iterations_used[1]} converged={run.converged}")
    return EXIT_OK


def _cmd_benchmark(args) -> int:
    if args.workers < 1:
        raise ConfigError(f"--workers must be >= 1, got {args.workers}")
    plan = load_plan(args.plan)
    report = run_benchmark(plan, workers=args.workers)
    os.makedirs(args.out, exist_ok=True)
    write_traces_csv(report, os.path.join(args.out, "traces.csv"))
    write_summary_json(report, os.path.join(args.out, "summary.json"))
    if not args.no_plots:
        from .plots import save_benchmark_figures

        save_benchmark_figures(report, args.out)
    failed = [c for c in report.cells if c.status != "ok"]
    for agg in report.aggregates():
        raw = agg.get("nmse_raw")
        med = f"{raw['median']:.6g}" if raw else "n/a"
        print(f"{agg['solver']:>4s}  ratio {agg['ratio']:g}  median nmse {med}  ({agg['runs']} runs)")
    if failed:
        print(f"{len(failed)} cell(s) failed; see summary.json", file=sys.stderr)
    return EXIT_OK


def _cmd_synth(args) -> int:
    try:
        alphabet = Alphabet.from_string(args.alphabet)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    result = synth_discrete_lowrank(args.rows, args.cols, args.rank, alphabet, args.seed)
    write_matrix_csv(args.out, result.quantized)
    print(f"wrote {args.rows}x{args.cols} rank-{args.rank} matrix to {args.out}")
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("DAMC_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "complete":
            return _cmd_complete(args)
        if args.command == "benchmark":
            return _cmd_benchmark(args)
        if args.command == "synth":
            return _cmd_synth(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, MetricError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
