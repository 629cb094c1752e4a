from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

from conftest import FIXTURES
from lrvc import Q
from lrvc.cli import SWEEP_COLUMNS, main
from lrvc.graph import parse_graph


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_run_k2_reports_ratio_two(capsys):
    code, out, _ = run_cli(capsys, "run", "--graph", str(FIXTURES / "k2_unit.graph"), "--eps", "2", "--no-meta")
    doc = json.loads(out)
    assert code == 0
    assert doc["verification"]["ratio"] == "2" and doc["verification"]["opt_weight"] == "1"
    assert doc["cover"] == [0, 1] and doc["ok"] is True


def test_run_eps_zero_is_config_error(capsys):
    code, _, err = run_cli(capsys, "run", "--graph", str(FIXTURES / "k2_unit.graph"), "--eps", "0")
    assert code == 2 and "--eps" in err


def test_run_edgeless_has_no_ratio(capsys):
    code, out, _ = run_cli(capsys, "run", "--graph", str(FIXTURES / "edgeless.graph"), "--eps", "1", "--no-meta")
    ver = json.loads(out)["verification"]
    assert code == 0 and "ratio" not in ver and ver["cover_valid"]


def test_run_needs_exactly_one_source(capsys):
    assert run_cli(capsys, "run", "--eps", "1")[0] == 2
    code = run_cli(capsys, "run", "--eps", "1", "--graph", str(FIXTURES / "k2_unit.graph"), "--family", "path", "--n", "3")[0]
    assert code == 2


def test_run_io_and_parse_errors(capsys, tmp_path):
    assert run_cli(capsys, "run", "--graph", str(tmp_path / "missing"), "--eps", "1")[0] == 2
    bad = tmp_path / "bad.graph"
    bad.write_text("2 1\n0 1\n1 1\n0 0\n")
    code, _, err = run_cli(capsys, "run", "--graph", str(bad), "--eps", "1")
    assert code == 2 and "line 4" in err


def test_run_bad_schedule(capsys):
    code = run_cli(capsys, "run", "--family", "path", "--n", "3", "--eps", "1", "--schedule", "0:3")[0]
    assert code == 2


def test_run_staggered_congest_csv(capsys, tmp_path):
    trace = tmp_path / "t.jsonl"
    code, out, _ = run_cli(
        capsys, "run", "--family", "erdos_renyi", "--n", "9", "--p", "0.5", "--weights", "uniform_integer",
        "--seed", "3", "--eps", "1/2", "--variant", "congest", "--schedule", "random:5", "--format", "csv",
        "--trace-out", str(trace),
    )
    (row,) = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and row["variant"] == "congest" and row["ok"] == "True"
    assert "verification.round_bound_violations" not in row
    assert float(row["cover_weight_float"]) == float(Q(row["cover_weight"]))
    assert all(json.loads(line)["kind"] for line in trace.read_text().splitlines())


def test_run_metadata_header(capsys):
    _, out, _ = run_cli(capsys, "run", "--graph", str(FIXTURES / "k2_unit.graph"), "--eps", "2")
    assert json.loads(out)["meta"]["tool"] == "lrvc"


def test_run_is_byte_deterministic(capsys):
    argv = ["run", "--family", "cycle", "--n", "7", "--weights", "uniform_rational", "--seed", "2", "--eps", "1/10",
            "--no-meta"]
    assert run_cli(capsys, *argv)[1] == run_cli(capsys, *argv)[1]


def test_sweep_grid_on_gnp(capsys):
    argv = ["sweep", "--family", "erdos_renyi", "--p", "0.4", "--n", "12", "--seeds", "0-9", "--no-meta"]
    for eps in ("1/10", "1/2", "1", "2"):
        argv += ["--eps", eps]
    code, out, _ = run_cli(capsys, *argv)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 40
    assert list(rows[0]) == list(SWEEP_COLUMNS)
    for r in rows:
        if r["ratio"]:
            assert Q(r["ratio"]) <= 2 + Q(r["eps"])
    assert [(r["eps"], r["seed"]) for r in rows[:3]] == [("1/10", "0"), ("1/10", "1"), ("1/10", "2")]


def test_sweep_stars_within_cap(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--family", "star", "--n", "3-11", "--eps", "2",
                           "--variant", "local", "--variant", "congest", "--format", "json", "--no-meta")
    rows = json.loads(out)["rows"]
    assert code == 0 and len(rows) == 18
    assert all(r["max_iterations"] <= r["predicted_bound"] for r in rows)


def test_sweep_empty_grid(capsys):
    assert run_cli(capsys, "sweep", "--family", "path", "--n", "", "--eps", "1")[0] == 2


def test_sweep_continues_past_bad_rows(capsys):
    code, out, err = run_cli(capsys, "sweep", "--family", "cycle", "--n", "2-4", "--eps", "1", "--no-meta")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 2 and len(rows) == 3
    assert rows[0]["error"] and rows[1]["ok"] == rows[2]["ok"] == "True"
    assert "1 of 3 rows failed" in err


def test_gen_writes_parseable_star(capsys, tmp_path):
    out = tmp_path / "s.graph"
    assert run_cli(capsys, "gen", "--family", "star", "--n", "6", "--out", str(out))[0] == 0
    g = parse_graph(out.read_text())
    assert sorted(g.degree(v) for v in range(6)) == [1, 1, 1, 1, 1, 5]


def test_gen_invalid_spec(capsys):
    assert run_cli(capsys, "gen", "--family", "cycle", "--n", "2")[0] == 2
    assert run_cli(capsys, "gen", "--family", "hexagon", "--n", "6")[0] == 2


def test_gen_same_seed_same_file(capsys):
    argv = ["gen", "--family", "erdos_renyi", "--n", "10", "--p", "0.3", "--weights", "uniform_rational", "--seed", "5"]
    assert run_cli(capsys, *argv)[1] == run_cli(capsys, *argv)[1]


def test_bounds_feasibility_flip(capsys):
    code, out, _ = run_cli(capsys, "bounds", "--k", "1-5", "--log2n", "100", "--eps", "1/4")
    rows = json.loads(out)["rows"]
    assert code == 0 and [r["feasible_n"] for r in rows] == [True, True, True, False, False]


def test_bounds_delta_row(capsys):
    _, out, _ = run_cli(capsys, "bounds", "--k", "3", "--log2Delta", "16")
    (row,) = json.loads(out)["rows"]
    assert row["k"] == 3 and row["log2_delta_Delta"] == "5/2"


def test_bounds_empty_range(capsys):
    code, out, _ = run_cli(capsys, "bounds", "--k", "", "--log2n", "10")
    assert code == 0 and json.loads(out)["rows"] == []


@pytest.mark.parametrize("k", ["x", "0-2", "3-a"])
def test_bounds_malformed_range(capsys, k):
    assert run_cli(capsys, "bounds", "--k", k, "--log2n", "10")[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lrvc", "bounds", "--k", "2", "--log2n", "64"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["rows"][0]["log2_delta_n"] == "5/2"


def test_run_verification_failure_exits_one(capsys, monkeypatch):
    import lrvc.cli as cli

    real = cli.verify_run

    def broken(*args, **kwargs):
        ver = real(*args, **kwargs)
        ver.cover_ok = False
        return ver

    monkeypatch.setattr(cli, "verify_run", broken)
    code, out, _ = run_cli(capsys, "run", "--graph", str(FIXTURES / "k2_unit.graph"), "--eps", "2", "--no-meta")
    assert code == 1 and json.loads(out)["ok"] is False
