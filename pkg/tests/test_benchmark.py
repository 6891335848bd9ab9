import json
import math

import numpy as np
import pytest

import damc.benchmark as bench_mod
from damc.benchmark import (
    TRACE_COLUMNS,
    load_dataset,
    load_plan,
    run_benchmark,
    write_summary_json,
    write_traces_csv,
)
from damc.errors import ConfigError, DataError


def small_plan(**overrides):
    plan = {
        "dataset": {"kind": "synthetic", "rows": 20, "cols": 20, "rank": 1,
                    "alphabet": [1, 2, 3, 4, 5], "seed": 3},
        "solvers": ["si", "l1"],
        "ratios": [0.5],
        "seeds": [0, 1],
        "config": {"alpha": 0.1, "lambda": 2.0, "zeta": 0.15,
                   "max_inner": 40, "max_outer": 3, "inner_tol": 1e-5,
                   "outer_tol": 1e-3},
    }
    plan.update(overrides)
    return plan


def strip_timing(text: str) -> str:
    lines = text.strip().split("\n")
    header = lines[0].split(",")
    keep = [i for i, c in enumerate(header) if c != "wall_ms"]
    return "\n".join(",".join(line.split(",")[i] for i in keep) for line in lines)


def test_load_plan_validation(tmp_path):
    with pytest.raises(ConfigError):
        load_plan({"solvers": ["si"]})
    with pytest.raises(ConfigError):
        load_plan(small_plan(solvers=["bogus"]))
    with pytest.raises(ConfigError):
        load_plan(small_plan(ratios=[1.5]))
    with pytest.raises(ConfigError):
        load_plan(small_plan(config={"lambda": 2.0, "typo_key": 1}))
    bad = tmp_path / "plan.json"
    bad.write_text("{not json")
    with pytest.raises(DataError):
        load_plan(str(bad))


def test_load_plan_from_file(tmp_path):
    path = tmp_path / "plan.json"
    path.write_text(json.dumps(small_plan()))
    plan = load_plan(str(path))
    assert plan.solvers == ("si", "l1")
    assert plan.config["lam"] == 2.0


def test_load_dataset_kinds(tmp_path):
    ds, alphabet = load_dataset({"kind": "synthetic", "rows": 8, "cols": 9, "rank": 1,
                                 "alphabet": [1, 2], "seed": 0})
    assert ds.O.shape == (8, 9) and len(alphabet) == 2
    with pytest.raises(ConfigError):
        load_dataset({"kind": "nope"})
    with pytest.raises(ConfigError):
        load_dataset({"kind": "movielens"})
    with pytest.raises(DataError):
        load_dataset({"kind": "movielens", "path": str(tmp_path / "missing.data")})


def test_run_benchmark_report_shape():
    report = run_benchmark(load_plan(small_plan()))
    assert len(report.cells) == 4  # 2 solvers x 1 ratio x 2 seeds
    for cell in report.cells:
        assert cell.status == "ok"
        assert not math.isnan(cell.nmse_raw)
        assert not math.isnan(cell.nmse_projected)
        assert cell.trace
    aggs = report.aggregates()
    assert len(aggs) == 2
    for agg in aggs:
        assert agg["runs"] == 2
        assert agg["nmse_raw"]["min"] <= agg["nmse_raw"]["median"] <= agg["nmse_raw"]["max"]


def test_run_benchmark_single_cell():
    report = run_benchmark(load_plan(small_plan(solvers=["si"], seeds=[5])))
    assert len(report.cells) == 1


def test_run_benchmark_ratio_one_has_no_metric():
    report = run_benchmark(load_plan(small_plan(solvers=["si"], ratios=[1.0], seeds=[0])))
    cell = report.cells[0]
    assert cell.status == "ok"
    assert math.isnan(cell.nmse_raw)
    assert report.aggregates()[0]["nmse_raw"] is None


def test_run_benchmark_records_cell_failure(monkeypatch):
    from damc.errors import NumericError

    real = bench_mod.run_solver

    def flaky(name, O, omega, alphabet, cfg, gt=None):
        if name == "l1" and cfg.seed == 1:
            raise NumericError("synthetic breakdown")
        return real(name, O, omega, alphabet, cfg, gt)

    monkeypatch.setattr(bench_mod, "run_solver", flaky)
    report = run_benchmark(load_plan(small_plan()))
    failed = [c for c in report.cells if c.status == "failed"]
    assert len(failed) == 1
    assert failed[0].solver == "l1" and failed[0].seed == 1
    assert "NumericError" in failed[0].error
    assert sum(c.status == "ok" for c in report.cells) == 3
    # aggregates still compute over the surviving runs
    agg = next(a for a in report.aggregates() if a["solver"] == "l1")
    assert agg["runs"] == 1


def test_traces_csv_layout_and_determinism(tmp_path):
    plan = load_plan(small_plan())
    r1 = run_benchmark(plan)
    r2 = run_benchmark(plan)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_traces_csv(r1, p1)
    write_traces_csv(r2, p2)
    t1, t2 = p1.read_text(), p2.read_text()
    assert t1.split("\n")[0] == ",".join(TRACE_COLUMNS)
    assert strip_timing(t1) == strip_timing(t2)


def test_summary_json_round_trip(tmp_path):
    report = run_benchmark(load_plan(small_plan(solvers=["si"], seeds=[0])))
    path = tmp_path / "summary.json"
    write_summary_json(report, path)
    payload = json.loads(path.read_text())
    assert payload["plan"]["solvers"] == ["si"]
    assert len(payload["cells"]) == 1
    assert payload["cells"][0]["status"] == "ok"
    assert payload["cells"][0]["trace_file"] == "traces.csv"
    assert payload["aggregates"][0]["solver"] == "si"


def test_worker_pool_matches_sequential():
    plan = load_plan(small_plan(solvers=["si"], seeds=[0, 1]))
    seq = run_benchmark(plan, workers=1)
    par = run_benchmark(plan, workers=2)
    for a, b in zip(seq.cells, par.cells):
        assert (a.solver, a.ratio, a.seed) == (b.solver, b.ratio, b.seed)
        assert a.nmse_raw == b.nmse_raw
        assert [r.objective for r in a.trace] == [r.objective for r in b.trace]
