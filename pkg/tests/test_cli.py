import csv
import io
import json
import subprocess
import sys

import pytest

from tenseig.cli import main
from tenseig.io import read_result, read_tensor


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def tomega_file(tmp_path, capsys):
    path = tmp_path / "t.json"
    assert run(capsys, "model", "--family", "t-omega", "--n", 3, "--omega", 0.125, "-o", path)[0] == 0
    return path


def test_oracle_generic(capsys):
    code, out, _ = run(capsys, "oracle", "--n", 5, "--omega", 0.02)
    assert code == 0
    assert out.splitlines()[0] == "N=31"
    assert "rank_deficient=0" in out


def test_oracle_threshold(capsys, tmp_path):
    code, out, _ = run(capsys, "oracle", "--n", 3, "--omega", 0.125, "-o", tmp_path / "p.json")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "N=4" and "rank_deficient=3" in lines
    thresholds = [float(v) for v in lines[1].split("=")[1].split(",")]
    assert thresholds[0] == pytest.approx(0.125)
    assert len(read_result(tmp_path / "p.json")) == 4


@pytest.mark.parametrize("family,extra", [("t-omega", ["--omega", "0.1"]), ("random", ["--m", "4", "--seed", "3"]),
                                          ("identity", []), ("motzkin", []), ("pairwise-quartic", [])])
def test_model_families(capsys, tmp_path, family, extra):
    path = tmp_path / "t.txt"
    code, _, _ = run(capsys, "model", "--family", family, "--n", 3, *extra, "--format", "text", "-o", path)
    assert code == 0
    T = read_tensor(path)
    assert T.order >= 3


def test_solve(capsys, tomega_file, tmp_path):
    code, out, _ = run(capsys, "solve", "--tensor", tomega_file, "--x0", "1,0.1,0.2", "-o", tmp_path / "s.json")
    assert code == 0 and "status=converged" in out
    res = read_result(tmp_path / "s.json")
    assert res.residual <= 1e-8


def test_solve_iteration_cap_exit_2(capsys, tomega_file):
    code, out, _ = run(capsys, "solve", "--tensor", tomega_file, "--method", "hopm", "--kmax", 1, "--x0", "1,0.3,0.2")
    assert code == 2 and "iteration-cap" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--tensor", "/nonexistent/t.json"],
        ["solve", "--bogus"],
        ["frobnicate"],
        [],
        ["oracle", "--n", "3"],
        ["enumerate", "--tensor", "TENSOR", "--method", "newton"],
        ["solve", "--tensor", "TENSOR", "--x0", "1,2"],
        ["solve", "--tensor", "TENSOR", "--x0", "0,0,0"],
        ["sweep-omega", "--n", "3", "--steps", "0"],
    ],
)
def test_usage_errors(capsys, tomega_file, argv):
    argv = [str(tomega_file) if a == "TENSOR" else a for a in argv]
    assert run(capsys, *argv)[0] == 1


def test_malformed_tensor_is_usage_error(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"order": 3, "dim": 2, "format": "dense", "entries": [1, 2]}))
    assert run(capsys, "solve", "--tensor", p)[0] == 1


def test_enumerate_csv_stdout(capsys, tomega_file):
    code, out, err = run(capsys, "enumerate", "--tensor", tomega_file, "--starts", 1000, "--jobs", 2)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 4
    assert "pairs=4" in err and "starts=1000" in err


def test_enumerate_json_deterministic(capsys, tomega_file, tmp_path):
    for k, jobs in enumerate((1, 3)):
        assert run(capsys, "enumerate", "--tensor", tomega_file, "--starts", 1200, "--jobs", jobs,
                   "-o", tmp_path / f"r{k}.json")[0] == 0
    assert (tmp_path / "r0.json").read_bytes() == (tmp_path / "r1.json").read_bytes()


def test_enumerate_stop_at_oracle(capsys, tmp_path):
    tpath, ppath = tmp_path / "t.json", tmp_path / "oracle.json"
    run(capsys, "model", "--family", "t-omega", "--n", 4, "--omega", 0.0, "-o", tpath)
    run(capsys, "oracle", "--n", 4, "--omega", 0.0, "-o", ppath)
    code, _, err = run(capsys, "enumerate", "--tensor", tpath, "--starts", 10000, "--stop-at-oracle", ppath,
                       "-o", tmp_path / "r.json")
    assert code == 0 and "status=complete" in err
    res = read_result(tmp_path / "r.json")
    assert len(res.pairs) == 15 and res.starts < 10000


def test_enumerate_budget_exhausted_exit_2(capsys, tmp_path):
    tpath, ppath = tmp_path / "t.json", tmp_path / "p.json"
    run(capsys, "model", "--family", "t-omega", "--n", 3, "--omega", 0.5, "-o", tpath)
    ppath.write_text(json.dumps({"kind": "pairs", "pairs": [{"x": [1, 0, 0], "eigenvalue": 1.0}]}))
    code, _, err = run(capsys, "enumerate", "--tensor", tpath, "--starts", 50, "--stop-at-oracle", ppath)
    assert code == 2 and "budget-exhausted" in err


def test_classify(capsys, tomega_file, tmp_path):
    run(capsys, "enumerate", "--tensor", tomega_file, "--starts", 500, "-o", tmp_path / "r.json")
    code, out, _ = run(capsys, "classify", "--tensor", tomega_file, "--pairs", tmp_path / "r.json")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 4 and all(r["valid"] == "1" for r in rows)
    assert sum(r["newton_stable"] == "0" for r in rows) == 3


def test_classify_invalid_pair_exit_2(capsys, tomega_file, tmp_path):
    p = tmp_path / "p.json"
    p.write_text(json.dumps({"kind": "pairs", "pairs": [{"x": [1, 0.5, 0], "eigenvalue": 1.0}]}))
    code, out, _ = run(capsys, "classify", "--tensor", tomega_file, "--pairs", p)
    assert code == 2 and ",0," in out.splitlines()[1]


def test_classify_dim_mismatch_usage(capsys, tomega_file, tmp_path):
    p = tmp_path / "p.json"
    p.write_text(json.dumps({"kind": "pairs", "pairs": [{"x": [1, 0], "eigenvalue": 1.0}]}))
    assert run(capsys, "classify", "--tensor", tomega_file, "--pairs", p)[0] == 1


def test_basin(capsys, tomega_file, tmp_path):
    code, _, _ = run(capsys, "basin", "--tensor", tomega_file, "--grid", 10, "--method", "ncm",
                     "-o", tmp_path / "b.csv", "--pairs-output", tmp_path / "p.csv")
    assert code == 0
    rows = (tmp_path / "b.csv").read_text().strip().splitlines()
    assert len(rows) == 10 * 20 + 1
    assert rows[0] == "theta_index,phi_index,theta,phi,pair,iterations"


def test_basin_needs_dim3(capsys, tmp_path):
    path = tmp_path / "t.json"
    run(capsys, "model", "--family", "t-omega", "--n", 4, "-o", path)
    assert run(capsys, "basin", "--tensor", path, "--grid", 5)[0] == 1


def test_sweep_omega(capsys):
    # grid avoids omega = 1/n^2, where all subset solutions meet the uniform vector
    code, out, _ = run(capsys, "sweep-omega", "--n", 5, "--omega-min", 0.001, "--omega-max", 0.3, "--steps", 40)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    counts = [int(r["count"]) for r in rows]
    assert counts[0] == 31 and counts[-1] == 1
    assert all(a >= b for a, b in zip(counts, counts[1:]))
    assert all(len(r["eigenvalues"].split(";")) == int(r["count"]) for r in rows)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "tenseig", "oracle", "--n", "3", "--omega", "0.2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("N=")
    proc = subprocess.run([sys.executable, "-m", "tenseig", "solve"], capture_output=True, text=True)
    assert proc.returncode == 1
