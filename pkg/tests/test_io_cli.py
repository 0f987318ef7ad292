from __future__ import annotations

import json

import numpy as np
import pytest

from loopnet.cli import main
from loopnet.graph import triangle
from loopnet.io import BUNDLED, SchemaError, dumps, fmt, graph_to_yaml, load_graph, parse_graph


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_graphs_load(name):
    g = load_graph(name)
    assert g.n >= 2
    assert parse_graph(graph_to_yaml(g)) == g


def test_parse_and_roundtrip(lopsided):
    assert parse_graph(graph_to_yaml(lopsided)) == lopsided
    assert parse_graph('{"vertices": 2, "edges": [{"u": 0, "v": 1, "c": 2}], "killing": [1, 0]}').conductance[0, 1] == 2.0


@pytest.mark.parametrize(
    "text, line, msg",
    [
        ("vertices: 2\nedges:\n  - {u: 0, v: 5, c: 1}\nkilling: [1, 1]\n", 3, "out of range"),
        ("vertices: 2\nedges:\n  - {u: 0, v: 1, c: -1}\nkilling: [1, 1]\n", 3, "positive"),
        ("vertices: 2\nedges:\n  - {u: 0, v: 1, c: 1}\n  - {u: 1, v: 0, c: 1}\nkilling: [1, 1]\n", 4, "duplicate edge"),
        ("vertices: 2\nedges: []\nkilling: [1]\n", 3, "killing has 1"),
        ("vertices: 2\nedges:\n  - {u: 0, v: 1}\nkilling: [1, 1]\n", 3, "exactly the keys"),
        ("vertices: 2\ncolour: red\nedges: []\nkilling: [1, 1]\n", 2, "unknown key"),
        ("vertices: two\nedges: []\nkilling: [1, 1]\n", 1, "integer"),
        ("vertices: 2\nedges:\n  - {u: 0, v: 1, c: 1}\nkilling: [0, 0]\n", 1, "transience"),
    ],
)
def test_schema_errors_carry_line_numbers(text, line, msg):
    with pytest.raises(SchemaError, match=msg) as exc:
        parse_graph(text)
    assert exc.value.line == line


def test_number_formatting():
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(3) == "3"
    assert dumps({"a": [1, 0.5, True, None], "b": np.float64(1 / 3)}) == '{"a": [1, 0.5, true, null], "b": 0.33333333333333331}'


def test_sample_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert main(["sample", "--graph", "triangle", "--n", "50", "--seed", "4", "--what", "fields", "--out", str(a)]) == 0
    assert main(["sample", "--graph", "triangle", "--n", "50", "--seed", "4", "--what", "fields", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    rows = [json.loads(l) for l in a.read_text().splitlines()]
    assert len(rows) == 50 and all(len(r["occupation"]) == 3 for r in rows)


@pytest.mark.parametrize("what", ["networks", "loops", "configurations"])
def test_sample_kinds(capsys, what):
    code, out, _ = _run(capsys, "sample", "--graph", "two-vertex", "--n", "5", "--seed", "1", "--what", what)
    assert code == 0 and out


def test_pmf_command(tmp_path, capsys):
    net = tmp_path / "k.txt"
    net.write_text("0 1 2\n1 0 2\n")
    code, out, _ = _run(capsys, "pmf", "--graph", "two-vertex", "--network", str(net))
    assert code == 0
    assert json.loads(out)["probability"] == pytest.approx(0.75 / 16)
    net.write_text("#kind: even\n0 1 2\n")
    code, out, _ = _run(capsys, "pmf", "--graph", "two-vertex", "--network", str(net))
    assert json.loads(out)["probability"] == pytest.approx(3**0.5 / 2 * 2 / 16)


def test_validation_errors_exit_one(tmp_path, capsys):
    bad = tmp_path / "g.yaml"
    bad.write_text("vertices: 2\nedges:\n  - {u: 0, v: 3, c: 1}\nkilling: [1, 1]\n")
    code, _, err = _run(capsys, "sample", "--graph", str(bad), "--seed", "1")
    assert code == 1 and "line 3" in err
    code, _, err = _run(capsys, "pmf", "--graph", "triangle", "--network", str(tmp_path / "missing.txt"))
    assert code == 1
    net = tmp_path / "odd.txt"
    net.write_text("0 1 1\n")
    code, _, err = _run(capsys, "pmf", "--graph", "triangle", "--network", str(net))
    assert code == 1 and "Eulerian" in err
    code, _, _ = _run(capsys, "sample", "--graph", "triangle")  # missing --seed
    assert code == 1
    code, _, _ = _run(capsys, "sample", "--graph", "triangle", "--seed", "1", "--alpha", "-1")
    assert code == 1


def test_maps_command(capsys):
    code, out, _ = _run(capsys, "maps", "--graph", "k4", "--n", "200", "--seed", "3", "--complete-check")
    assert code == 0
    summary = json.loads(out.splitlines()[-1])
    assert summary["expected_chi"] == pytest.approx(summary["complete_graph_expected_chi"], rel=1e-12)
    assert abs(summary["mean_chi"] - summary["expected_chi"]) < 5 * summary["se"]
    code, _, err = _run(capsys, "maps", "--graph", "triangle", "--n", "5", "--seed", "1", "--complete-check")
    assert code == 0
    code, _, err = _run(capsys, "maps", "--graph", "path3", "--n", "5", "--seed", "1", "--complete-check")
    assert code == 1 and "complete graph" in err


def test_flow_and_homology_commands(capsys):
    code, out, _ = _run(capsys, "flow", "--graph", "triangle", "--max-total", "3", "--n", "2000", "--seed", "2")
    assert code == 0
    rows = [json.loads(l) for l in out.splitlines()]
    assert rows[0]["probability"] == pytest.approx(2 / 5**0.5, rel=1e-10)
    code, out, _ = _run(capsys, "homology", "--graph", "triangle", "--grid", "32")
    rows = [json.loads(l) for l in out.splitlines()]
    assert code == 0 and rows[-1]["summary"] and rows[-1]["total"] == pytest.approx(1.0, abs=1e-9)
    code, out, _ = _run(capsys, "homology", "--graph", "tree")
    assert json.loads(out.splitlines()[0]) == {"class": [], "pmf": 1.0}


def test_complete_graph_command(capsys):
    code, out, _ = _run(capsys, "complete-graph", "--d", "5", "--kappa", "0.5", "--v", "0")
    rec = json.loads(out)
    assert code == 0 and rec["agree"]
    assert rec["u"] - np.log(rec["u"]) == pytest.approx(np.log(5.0))


def test_verify_command(tmp_path, capsys):
    report = tmp_path / "r.json"
    code, out, _ = _run(capsys, "verify", "--scale", "0.01", "--only", "1,4", "--out", str(report))
    assert code == 0
    rows = json.loads(report.read_text())
    assert [r["test_id"] for r in rows] == [1, 4]
    assert all({"statement", "pass", "details"} <= set(r) for r in rows)
    code, _, _ = _run(capsys, "verify", "--scale", "0.01", "--only", "2", "--perturb-expected")
    assert code == 2
