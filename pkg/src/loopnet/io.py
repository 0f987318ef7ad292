"""Graph files and numeric output.

A graph file is a YAML (or JSON, which YAML reads as well) document::

    vertices: 3
    edges:
      - {u: 0, v: 1, c: 1.0}
      - {u: 1, v: 2, c: 2.5}
    killing: [1.0, 0.0, 0.5]

Validation errors carry the line number of the offending node.
"""
from __future__ import annotations

import math
from importlib import resources
from pathlib import Path

import yaml

from .graph import GraphError, WeightedGraph


class SchemaError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _line(node) -> int:
    return node.start_mark.line + 1


def _scalar(node, kind, what):
    if not isinstance(node, yaml.ScalarNode):
        raise SchemaError(f"{what} must be a scalar", _line(node))
    try:
        value = yaml.safe_load(yaml.serialize(node))
    except yaml.YAMLError as exc:  # pragma: no cover - serialize of a parsed scalar
        raise SchemaError(str(exc), _line(node)) from exc
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise SchemaError(f"{what} must be an integer", _line(node))
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise SchemaError(f"{what} must be a finite number", _line(node))
    return float(value)


def _mapping(node, what):
    if not isinstance(node, yaml.MappingNode):
        raise SchemaError(f"{what} must be a mapping", _line(node))
    out = {}
    for k, v in node.value:
        if not isinstance(k, yaml.ScalarNode):
            raise SchemaError(f"{what} keys must be plain names", _line(k))
        if k.value in out:
            raise SchemaError(f"duplicate key {k.value!r}", _line(k))
        out[k.value] = v
    return out


def parse_graph(text: str, name: str = "") -> WeightedGraph:
    """Parse and validate a graph document."""
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise SchemaError(f"malformed document: {getattr(exc, 'problem', exc)}", mark.line + 1 if mark else None) from exc
    if root is None:
        raise SchemaError("empty graph document", 1)
    top = _mapping(root, "graph document")
    for key in top:
        if key not in ("vertices", "edges", "killing", "name"):
            raise SchemaError(f"unknown key {key!r}", _line(top[key]))
    for key in ("vertices", "edges", "killing"):
        if key not in top:
            raise SchemaError(f"missing key {key!r}", _line(root))
    n = _scalar(top["vertices"], int, "vertices")
    if n < 1:
        raise SchemaError("vertices must be positive", _line(top["vertices"]))
    if not isinstance(top["edges"], yaml.SequenceNode):
        raise SchemaError("edges must be a list", _line(top["edges"]))
    edges = []
    for item in top["edges"].value:
        rec = _mapping(item, "edge")
        if set(rec) != {"u", "v", "c"}:
            raise SchemaError("edge needs exactly the keys u, v, c", _line(item))
        u = _scalar(rec["u"], int, "u")
        v = _scalar(rec["v"], int, "v")
        c = _scalar(rec["c"], float, "c")
        for end, node in ((u, rec["u"]), (v, rec["v"])):
            if not 0 <= end < n:
                raise SchemaError(f"vertex {end} out of range 0..{n - 1}", _line(node))
        if c <= 0:
            raise SchemaError("conductance must be positive", _line(rec["c"]))
        edges.append((u, v, c, _line(item)))
    kill_node = top["killing"]
    if not isinstance(kill_node, yaml.SequenceNode):
        raise SchemaError("killing must be a list", _line(kill_node))
    killing = [_scalar(k, float, "killing rate") for k in kill_node.value]
    if len(killing) != n:
        raise SchemaError(f"killing has {len(killing)} entries, expected {n}", _line(kill_node))
    if "name" in top:
        name = str(yaml.safe_load(yaml.serialize(top["name"])))
    seen = {}
    for u, v, _, line in edges:
        key = (min(u, v), max(u, v))
        if u == v:
            raise SchemaError(f"self-loop at vertex {u}", line)
        if key in seen:
            raise SchemaError(f"duplicate edge {key}, first given on line {seen[key]}", line)
        seen[key] = line
    try:
        return WeightedGraph(n, tuple((u, v, c) for u, v, c, _ in edges), tuple(killing), name=name)
    except GraphError as exc:
        raise SchemaError(str(exc), _line(root)) from exc


BUNDLED = ("two-vertex", "triangle", "k4", "path3", "tree")


def bundled_graph_text(name: str) -> str:
    return resources.files("loopnet").joinpath("data", f"{name}.yaml").read_text()


def load_graph(path: str) -> WeightedGraph:
    """Read a graph file; a bundled graph name (e.g. ``triangle``) also works."""
    p = Path(path)
    if not p.exists() and path in BUNDLED:
        return parse_graph(bundled_graph_text(path), name=path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read graph file {path}: {exc.strerror}") from exc
    return parse_graph(text, name=p.stem)


def graph_to_yaml(g: WeightedGraph) -> str:
    lines = [f"vertices: {g.n}", "edges:"]
    lines += [f"  - {{u: {u}, v: {v}, c: {fmt(c)}}}" for u, v, c in g.edges]
    if not g.edges:
        lines[-1] = "edges: []"
    lines.append("killing: [" + ", ".join(fmt(k) for k in g.killing) + "]")
    return "\n".join(lines) + "\n"


# -- numbers -------------------------------------------------------------------

def fmt(x) -> str:
    """Floats with 17 significant digits; integers unchanged."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def dumps(obj) -> str:
    """Compact JSON with every float written to 17 significant digits."""
    import numpy as np

    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(float(obj))
    if isinstance(obj, str):
        import json

        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")
