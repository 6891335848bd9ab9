"""Benchmark orchestration: run solver/ratio/seed grids and collect results.

A plan (JSON) names a dataset, the solvers to run, the observation ratios,
the seeds, and the shared hyperparameters.  Every cell of the grid is run
independently; failures are recorded per cell without aborting the sweep.
Traces go to one CSV (a row per solver iteration), the summary with
per-cell results and per-(solver, ratio) aggregates to JSON.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .data import (
    Dataset,
    RATING_ALPHABET,
    SplitSpec,
    build_matrix,
    dataset_from_matrix,
    parse_movielens,
    read_matrix_csv,
    split,
    synth_discrete_lowrank,
)
from .errors import CompletionError, ConfigError, DataError
from .metrics import alphabet_project, nmse
from .regularizer import Alphabet
from .solvers import GroundTruth, SolverConfig, SOLVER_NAMES, TraceRecord, run_solver

__all__ = [
    "BenchmarkPlan",
    "CellResult",
    "BenchmarkReport",
    "load_plan",
    "load_dataset",
    "run_benchmark",
    "write_traces_csv",
    "write_summary_json",
    "TRACE_COLUMNS",
    "TIMING_COLUMNS",
]

log = logging.getLogger(__name__)

TRACE_COLUMNS = [
    "solver", "ratio", "seed", "phase", "outer", "inner", "iter",
    "objective", "nmse", "rel_change", "wall_ms",
]
TIMING_COLUMNS = ["wall_ms"]

_CONFIG_KEYS = {
    "alpha": "alpha",
    "lambda": "lam",
    "zeta": "zeta",
    "max_inner": "max_inner_iters",
    "max_outer": "max_outer_iters",
    "inner_tol": "inner_tol",
    "outer_tol": "outer_tol",
    "mu_override": "mu_override",
    "lipschitz_rule": "lipschitz_rule",
}


@dataclass(frozen=True)
class BenchmarkPlan:
    dataset: dict
    solvers: tuple[str, ...]
    ratios: tuple[float, ...]
    seeds: tuple[int, ...]
    config: dict  # SolverConfig kwargs without the seed

    def cells(self):
        for solver in self.solvers:
            for ratio in self.ratios:
                for seed in self.seeds:
                    yield solver, ratio, seed


def load_plan(obj) -> BenchmarkPlan:
    """Validate a plan given as a dict or a JSON file path."""
    if isinstance(obj, (str, bytes)) or hasattr(obj, "__fspath__"):
        try:
            with open(obj, "r", encoding="utf-8") as fh:
                obj = json.load(fh)
        except OSError as exc:
            raise DataError(f"cannot read plan: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise DataError(f"plan is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError("plan must be a JSON object")
    missing = {"dataset", "solvers", "ratios", "seeds"} - obj.keys()
    if missing:
        raise ConfigError(f"plan is missing keys: {sorted(missing)}")
    solvers = tuple(obj["solvers"])
    for s in solvers:
        if s not in SOLVER_NAMES:
            raise ConfigError(f"unknown solver {s!r}; expected one of {SOLVER_NAMES}")
    ratios = tuple(float(r) for r in obj["ratios"])
    if not ratios or any(not (0.0 < r <= 1.0) for r in ratios):
        raise ConfigError(f"ratios must lie in (0, 1], got {list(ratios)}")
    seeds = tuple(int(s) for s in obj["seeds"])
    if not seeds:
        raise ConfigError("plan needs at least one seed")
    raw_cfg = obj.get("config", {})
    cfg_kwargs = {}
    for key, value in raw_cfg.items():
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}; expected one of {sorted(_CONFIG_KEYS)}")
        cfg_kwargs[_CONFIG_KEYS[key]] = value
    SolverConfig(**cfg_kwargs)  # validate ranges early
    return BenchmarkPlan(dict(obj["dataset"]), solvers, ratios, seeds, cfg_kwargs)


def load_dataset(spec: dict) -> tuple[Dataset, Alphabet]:
    """Materialize the dataset named by a plan's ``dataset`` entry."""
    kind = spec.get("kind")
    if kind == "movielens":
        path = spec.get("path")
        if not path:
            raise ConfigError("movielens dataset needs a 'path'")
        try:
            with open(path, "rb") as fh:
                records = parse_movielens(fh)
        except OSError as exc:
            raise DataError(f"cannot read ratings file: {exc}") from exc
        return build_matrix(records), RATING_ALPHABET
    if kind == "synthetic":
        try:
            rows, cols, rank = int(spec["rows"]), int(spec["cols"]), int(spec["rank"])
        except KeyError as exc:
            raise ConfigError(f"synthetic dataset needs {exc.args[0]!r}") from None
        alphabet = Alphabet(spec.get("alphabet", RATING_ALPHABET.values))
        seed = int(spec.get("seed", 0))
        result = synth_discrete_lowrank(rows, cols, rank, alphabet, seed)
        return dataset_from_matrix(result.quantized), alphabet
    if kind == "csv":
        path = spec.get("path")
        if not path:
            raise ConfigError("csv dataset needs a 'path'")
        M = read_matrix_csv(path)
        alphabet = Alphabet(spec.get("alphabet", RATING_ALPHABET.values))
        return dataset_from_matrix(M), alphabet
    raise ConfigError(f"unknown dataset kind {kind!r}; expected movielens, synthetic, or csv")


@dataclass
class CellResult:
    solver: str
    ratio: float
    seed: int
    status: str  # "ok" or "failed"
    error: str = ""
    nmse_raw: float = math.nan
    nmse_projected: float = math.nan
    converged: bool = False
    outer_iters: int = 0
    inner_iters: int = 0
    wall_ms: float = 0.0
    trace: list[TraceRecord] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "solver": self.solver,
            "ratio": self.ratio,
            "seed": self.seed,
            "status": self.status,
            "error": self.error,
            "nmse_raw": self.nmse_raw,
            "nmse_projected": self.nmse_projected,
            "converged": self.converged,
            "iterations": {
                "outer": self.outer_iters,
                "inner": self.inner_iters,
                "trace_len": len(self.trace),
            },
            "wall_ms": self.wall_ms,
            "trace_file": "traces.csv",
        }


@dataclass
class BenchmarkReport:
    plan: BenchmarkPlan
    cells: list[CellResult]

    def aggregates(self) -> list[dict]:
        out = []
        for solver in self.plan.solvers:
            for ratio in self.plan.ratios:
                ok = [c for c in self.cells
                      if c.solver == solver and c.ratio == ratio and c.status == "ok"]
                entry = {"solver": solver, "ratio": ratio, "runs": len(ok)}
                for kind in ("nmse_raw", "nmse_projected"):
                    vals = [getattr(c, kind) for c in ok if not math.isnan(getattr(c, kind))]
                    entry[kind] = (
                        {"median": float(np.median(vals)),
                         "min": float(np.min(vals)),
                         "max": float(np.max(vals))}
                        if vals else None
                    )
                out.append(entry)
        return out


def _run_cell(args) -> CellResult:
    ds, alphabet, solver, ratio, seed, cfg_kwargs = args
    cell = CellResult(solver, ratio, seed, "ok")
    try:
        cfg = SolverConfig(seed=seed, **cfg_kwargs)
        omega_train, omega_test = split(ds, SplitSpec(ratio, seed))
        gt = GroundTruth(ds.O, omega_test) if len(omega_test) > 0 else None
        tic = time.perf_counter()
        run = run_solver(solver, ds.O, omega_train, alphabet, cfg, gt)
        cell.wall_ms = (time.perf_counter() - tic) * 1e3
        cell.trace = run.trace
        cell.converged = run.converged
        cell.outer_iters, cell.inner_iters = run.iterations_used
        if gt is not None:
            cell.nmse_raw = nmse(run.final_X, ds.O, omega_test)
            projected = alphabet_project(run.final_X, alphabet, omega_test)
            cell.nmse_projected = nmse(projected, ds.O, omega_test)
    except CompletionError as exc:
        cell.status = "failed"
        cell.error = f"{type(exc).__name__}: {exc}"
        log.error("cell (%s, %.2f, %d) failed: %s", solver, ratio, seed, cell.error)
    return cell


def run_benchmark(plan: BenchmarkPlan, workers: int = 1) -> BenchmarkReport:
    """Run every (solver, ratio, seed) cell of the plan.

    Cells are independent; ``workers > 1`` fans them out to a process pool.
    Results are assembled in plan order either way, so reports are
    reproducible for a fixed plan.
    """
    ds, alphabet = load_dataset(plan.dataset)
    jobs = [(ds, alphabet, solver, ratio, seed, plan.config)
            for solver, ratio, seed in plan.cells()]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_run_cell, jobs))
    else:
        cells = [_run_cell(job) for job in jobs]
    return BenchmarkReport(plan, cells)


def _format_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_traces_csv(report_or_cells, path):
    """Write all iteration traces as one CSV with :data:`TRACE_COLUMNS`."""
    cells = report_or_cells.cells if isinstance(report_or_cells, BenchmarkReport) else report_or_cells
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for cell in cells:
            for r in cell.trace:
                writer.writerow([
                    cell.solver, _format_value(cell.ratio), cell.seed, r.phase,
                    r.outer, r.inner, r.iteration,
                    _format_value(r.objective), _format_value(r.nmse),
                    _format_value(r.rel_change), _format_value(r.wall_ms),
                ])


def write_summary_json(report: BenchmarkReport, path):
    """Write per-cell results and aggregates (plan echoed for provenance)."""
    payload = {
        "plan": {
            "dataset": report.plan.dataset,
            "solvers": list(report.plan.solvers),
            "ratios": list(report.plan.ratios),
            "seeds": list(report.plan.seeds),
            "config": report.plan.config,
        },
        "cells": [c.summary() for c in report.cells],
        "aggregates": report.aggregates(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, allow_nan=True)
        fh.write("\n")
