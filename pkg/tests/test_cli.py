import json

import numpy as np
import pytest

from damc.cli import main
from damc.data import read_matrix_csv


def run_cli(*argv):
    return main(list(argv))


@pytest.fixture()
def synth_csv(tmp_path):
    path = tmp_path / "m.csv"
    code = run_cli("synth", "--rows", "16", "--cols", "14", "--rank", "1",
                   "--alphabet", "1,2,3,4,5", "--seed", "3", "--out", str(path))
    assert code == 0
    return path


def test_synth_writes_matrix(synth_csv):
    M = read_matrix_csv(synth_csv)
    assert M.shape == (16, 14)
    assert set(np.unique(M).tolist()) <= {1.0, 2.0, 3.0, 4.0, 5.0}


def test_synth_deterministic(tmp_path, synth_csv):
    other = tmp_path / "again.csv"
    assert run_cli("synth", "--rows", "16", "--cols", "14", "--rank", "1",
                   "--alphabet", "1,2,3,4,5", "--seed", "3", "--out", str(other)) == 0
    assert other.read_text() == synth_csv.read_text()


def test_complete_on_csv(tmp_path, synth_csv):
    out = tmp_path / "run"
    code = run_cli("complete", "--input", str(synth_csv), "--solver", "l1",
                   "--ratio", "0.5", "--seed", "0", "--lambda", "2", "--zeta", "0.15",
                   "--max-inner", "30", "--out", str(out))
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["solver"] == "l1"
    assert summary["nmse_raw"] > 0
    trace = (out / "trace.csv").read_text().strip().split("\n")
    assert len(trace) >= 2  # header + iterations
    assert (out / "completed.csv").exists()
    assert (out / "convergence.png").exists()


def test_complete_no_plots(tmp_path, synth_csv):
    out = tmp_path / "run2"
    code = run_cli("complete", "--input", str(synth_csv), "--solver", "si",
                   "--ratio", "0.5", "--max-inner", "20", "--out", str(out), "--no-plots")
    assert code == 0
    assert not (out / "convergence.png").exists()


def test_complete_on_movielens_format(tmp_path):
    data = tmp_path / "u.data"
    rng = np.random.default_rng(0)
    lines = []
    for u in range(1, 13):
        for i in range(1, 11):
            if rng.random() < 0.8:
                lines.append(f"{u}\t{i}\t{int(rng.integers(1, 6))}\t{1000 + u}")
    data.write_text("\n".join(lines) + "\n")
    out = tmp_path / "run"
    code = run_cli("complete", "--input", str(data), "--solver", "si",
                   "--ratio", "0.6", "--max-inner", "20", "--out", str(out), "--no-plots")
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["status"] == "ok"


def test_benchmark_command(tmp_path, synth_csv):
    plan = {
        "dataset": {"kind": "csv", "path": str(synth_csv), "alphabet": [1, 2, 3, 4, 5]},
        "solvers": ["si", "l1"],
        "ratios": [0.5],
        "seeds": [0],
        "config": {"lambda": 2.0, "zeta": 0.15, "max_inner": 25, "max_outer": 2},
    }
    plan_path = tmp_path / "plan.json"
    plan_path.write_text(json.dumps(plan))
    out = tmp_path / "bench"
    code = run_cli("benchmark", "--plan", str(plan_path), "--out", str(out))
    assert code == 0
    assert (out / "traces.csv").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert len(summary["cells"]) == 2
    assert (out / "nmse_vs_ratio.png").exists()
    assert (out / "convergence_ratio0.5.png").exists()


def test_exit_code_config_error(tmp_path):
    assert run_cli("complete", "--input", "x.csv", "--solver", "nope",
                   "--ratio", "0.5", "--out", str(tmp_path)) == 1
    assert run_cli("benchmark", "--plan", "p.json", "--out", str(tmp_path),
                   "--workers", "0") == 1
    assert run_cli("synth", "--rows", "4", "--cols", "4", "--rank", "9",
                   "--alphabet", "1,2", "--seed", "0",
                   "--out", str(tmp_path / "x.csv")) == 1


def test_exit_code_data_error(tmp_path):
    assert run_cli("complete", "--input", str(tmp_path / "missing.data"),
                   "--solver", "si", "--ratio", "0.5", "--out", str(tmp_path)) == 2
    bad_plan = tmp_path / "bad.json"
    bad_plan.write_text("{broken")
    assert run_cli("benchmark", "--plan", str(bad_plan), "--out", str(tmp_path)) == 2


def test_exit_code_bad_ratio(tmp_path, synth_csv):
    assert run_cli("complete", "--input", str(synth_csv), "--solver", "si",
                   "--ratio", "7", "--out", str(tmp_path)) == 1
