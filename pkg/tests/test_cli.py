from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from obkit import io
from obkit.cli import main
from obkit.groups import cyclic


def write(tmp_path: Path, name: str, obj) -> str:
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


TRIANGLE = {"entries": [[0, "1/2", "1/2"], ["1/2", 0, "1/2"], ["1/2", "1/2", 0]]}


# --- metric -------------------------------------------------------------------------------


def test_metric_validate(tmp_path, capsys):
    code, rep = run_json(capsys, "metric", "validate", "--matrix", write(tmp_path, "m.json", TRIANGLE))
    assert code == 0 and rep["result"]["valid"] and rep["status"] == "pass"
    bad = {"entries": [[0, 1, "1/4"], [1, 0, "1/4"], ["1/4", "1/4", 0]]}
    code, rep = run_json(capsys, "metric", "validate", "--matrix", write(tmp_path, "b.json", bad))
    assert code == 1 and rep["result"]["kind"] == "triangle"


def test_metric_d1(tmp_path, capsys):
    A = write(tmp_path, "a.json", {"entries": [[0, 1], [1, 0]]})
    B = write(tmp_path, "b.json", {"entries": [[0, "1/2"], ["1/2", 0]]})
    code, rep = run_json(capsys, "metric", "d1", "--a", A, "--b", B)
    assert code == 0
    assert rep["result"]["d1"] == "1/2" and rep["result"]["d_inf"] == "1/2"
    assert {c["name"] for c in rep["checks"]} == {"metric.d1.sandwich", "metric.d1.glue_trace"}


def test_metric_net_and_geodesic(tmp_path, capsys):
    code, rep = run_json(capsys, "metric", "net", "--n", 2, "--eps", "1/2")
    assert code == 0 and rep["result"]["count"] > 0
    S = write(tmp_path, "s.json", TRIANGLE)
    code, rep = run_json(capsys, "metric", "geodesic", "--space", S, "--p", "0,1,1/4", "--q", "2")
    assert code == 0 and rep["result"]["distance"] == "3/4"  # 1/4 to an endpoint, then 1/2


# --- urysohn ----------------------------------------------------------------------------------


def test_urysohn_extend_and_budget(tmp_path, capsys):
    S = write(tmp_path, "s.json", TRIANGLE)
    M = write(tmp_path, "p.json", {"map": [[0, 1]]})
    code, rep = run_json(capsys, "urysohn", "extend", "--space", S, "--map", M, "--denom", 2, "--budget", 40)
    assert code == 0 and rep["status"] == "pass"
    line = write(tmp_path, "l.json", {"entries": [[0, "1/2", 1], ["1/2", 0, "1/2"], [1, "1/2", 0]]})
    code, rep = run_json(capsys, "urysohn", "extend", "--space", line, "--map", M, "--denom", 2, "--budget", 3)
    assert code == 3 and rep["status"] == "budget"


def test_urysohn_factor4(tmp_path, capsys):
    S = write(tmp_path, "s.json", TRIANGLE)
    M = write(tmp_path, "g.json", {"map": [[0, 1]]})
    code, rep = run_json(capsys, "urysohn", "factor4", "--space", S, "--map", M)
    assert code == 0 and all(c["status"] == "pass" for c in rep["checks"])


# --- trees --------------------------------------------------------------------------------------


def test_tree_commands(tmp_path, capsys):
    g = write(tmp_path, "g.json", {"word": "a"})
    h = write(tmp_path, "h.json", {"word": "baB"})
    code, rep = run_json(capsys, "tree", "cm1", "--g", g, "--h", h)
    assert code == 0 and rep["result"]["lhs"] == 4
    b = write(tmp_path, "b.json", {"word": "b"})
    code, rep = run_json(capsys, "tree", "cm1", "--g", g, "--h", b)
    assert code == 0 and rep["checks"][0]["status"] == "inapplicable"
    code, rep = run_json(capsys, "tree", "classify", "--g", write(tmp_path, "w.json", {"word": "abA"}))
    assert code == 0 and rep["result"]["kind"] == "hyperbolic" and rep["result"]["norm"] == 1


# --- groups and circular ------------------------------------------------------------------


def test_group_commands(tmp_path, capsys):
    G = write(tmp_path, "g.json", io.group_to_json(cyclic(4)))
    code, rep = run_json(capsys, "group", "square", "--group", G, "--set", "0,2")
    assert code == 0 and rep["result"] == {"majority": False, "covers": False, "missing": [1, 3]}
    code, rep = run_json(capsys, "group", "width", "--group", G, "--set", "0,1,3")
    assert code == 0 and rep["result"]["width"] == 2
    F = write(tmp_path, "f.json", {"start": -1, "sets": [[0], [0, 1, 3], [0, 1, 2, 3]]})
    code, rep = run_json(capsys, "group", "birkhoff", "--group", G, "--filtration", F)
    assert code == 0 and rep["result"]["d"][0][2] == "2"
    C = write(tmp_path, "c.json", {"sets": [[1], [0, 1, 2, 3]]})
    code, rep = run_json(capsys, "group", "chain", "--group", G, "--chain", C)
    assert code == 0 and rep["result"]["bound"] == {"n": 1, "k": 2}


def test_circular_commands(tmp_path, capsys):
    code, rep = run_json(capsys, "circular", "between", "--x", "1/2", "--y", "3/4", "--z", "1/4")
    assert code == 0 and rep["result"]["between"] is True
    cfg = write(tmp_path, "c.json", {"xbar": ["0", "1/8"], "ybar": ["1/4", "1/2"], "g": ["3/4", "3/8"]})
    code, rep = run_json(capsys, "circular", "produkt", "--config", cfg)
    assert code == 0 and rep["result"]["interval"] == [0]
    bad = write(tmp_path, "n.json", {"xbar": ["0", "1/8"], "ybar": ["1/2"], "g": ["1/8", "0"]})
    code, rep = run_json(capsys, "circular", "produkt", "--config", bad)
    assert code == 1 and rep["result"] == {"factorizable": False}


# --- exit codes and reports ------------------------------------------------------------------


def test_input_errors_exit_2(tmp_path, capsys):
    floats = write(tmp_path, "f.json", {"entries": [[0, 0.5], [0.5, 0]]})
    assert run(capsys, "metric", "d1", "--a", floats, "--b", floats)[0] == 2
    assert run(capsys, "metric", "validate", "--matrix", str(tmp_path / "missing.json"))[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["metric", "nosuch"])
    assert exc.value.code == 2
    assert run(capsys, "suite", "nosuch")[0] == 2


def test_suite_deterministic_and_tsv(tmp_path, capsys):
    out1, out2 = tmp_path / "r1.tsv", tmp_path / "r2.tsv"
    for out in (out1, out2):
        code, stdout, _ = run(capsys, "suite", "circular", "--seed", 42, "--samples", 30, "--format", "tsv", "--out", out)
        assert code == 0 and stdout == ""
    text = out1.read_text()
    assert text == out2.read_text()
    lines = text.splitlines()
    assert lines[0] == "check_name\tstatus\twitness_summary\tmicros"
    names = [l.split("\t")[0] for l in lines[1:]]
    assert names == sorted(names) and all(l.split("\t")[1] == "pass" for l in lines[1:])


def test_suite_json_timing_flag(capsys):
    code, rep = run_json(capsys, "suite", "group", "--seed", 1, "--samples", 5, "--timing")
    assert code == 0 and all("micros" in c for c in rep["checks"])
    code, rep = run_json(capsys, "suite", "group", "--seed", 1, "--samples", 5)
    assert all("micros" not in c for c in rep["checks"])


def test_module_entry_point(tmp_path):
    S = write(tmp_path, "m.json", TRIANGLE)
    cmd = [sys.executable, "-m", "obkit", "metric", "validate", "--matrix", S]
    first = subprocess.run(cmd, capture_output=True, text=True, check=False)
    second = subprocess.run(cmd, capture_output=True, text=True, check=False)
    assert first.returncode == 0 and first.stdout == second.stdout
    assert json.loads(first.stdout)["command"] == "metric validate"
