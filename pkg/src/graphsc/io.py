"""File formats, safe expression rules, and reproducible run manifests.

Graph files:  {"vertices": [...], "edges": [[x, y, weight], ...],
               "killing": {"x": value, ...}, "measure": {"x": value, ...}}
Vertex ids are integers or strings; map keys are matched by string form.
Weights are serialized as decimal doubles.

Family files: {"template": name, "parameters": {...}} with templates
``explicit`` (embedded graph), ``half_line`` / ``integer_line`` (parameters
``p`` or expression strings ``b``, ``c``, ``m`` in the variable n),
``jacobi`` (lambda), ``tree`` (branching), ``pendant_line`` and
``supergraph`` ({"base": <family dict or builtin name>, "single_vertex"}).

Every command records a RunManifest; outputs embed its hash so a run can be
replayed and compared byte for byte.
"""

from __future__ import annotations

import ast
import hashlib
import json
import math
from pathlib import Path
from typing import Callable, Dict

import numpy as np

from . import __version__
from .errors import InputError
from .families import (
    GraphFamily,
    build_supergraph,
    build_supergraph_single_vertex,
    explicit_family,
    family_from_name,
    half_line,
    integer_line,
    jacobi_counterexample,
    pendant_decorated_power_line,
    power_half_line,
    tree_family,
)
from .graphs import GraphSpec, graph_spec

# ---------------------------------------------------------------------------
# safe closed-form rules

_ALLOWED_CALLS = {
    "exp": math.exp, "log": math.log, "sqrt": math.sqrt, "abs": abs,
    "min": min, "max": max, "floor": math.floor, "ceil": math.ceil, "pow": pow,
}
_ALLOWED_NODES = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.Constant, ast.Name, ast.Call,
    ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.Mod, ast.FloorDiv,
    ast.USub, ast.UAdd, ast.Load, ast.IfExp, ast.Compare,
    ast.Lt, ast.LtE, ast.Gt, ast.GtE, ast.Eq, ast.NotEq,
)


def compile_rule(expr: str, var: str = "n") -> Callable[[int], float]:
    """Compile a closed-form weight rule in one integer variable.

    Only arithmetic, comparisons, conditional expressions and a small math
    whitelist are allowed; anything else is rejected.
    """
    tree = ast.parse(expr, mode="eval")
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise InputError(f"disallowed syntax in rule {expr!r}: {type(node).__name__}")
        if isinstance(node, ast.Name) and node.id != var and node.id not in _ALLOWED_CALLS:
            raise InputError(f"unknown name {node.id!r} in rule {expr!r}")
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _ALLOWED_CALLS:
                raise InputError(f"disallowed call in rule {expr!r}")
    code = compile(tree, "<rule>", "eval")

    def rule(n: int) -> float:
        return float(eval(code, {"__builtins__": {}}, {**_ALLOWED_CALLS, var: n}))

    return rule


# ---------------------------------------------------------------------------
# graphs


def _coerce_id(raw):
    return raw if isinstance(raw, (int, str)) else raw


def graph_from_dict(data: dict) -> GraphSpec:
    try:
        vertices = [_coerce_id(v) for v in data["vertices"]]
        edges = [(e[0], e[1], float(e[2])) for e in data.get("edges", [])]
    except (KeyError, TypeError, IndexError) as e:
        raise InputError(f"malformed graph payload: {e}") from None
    by_str = {str(v): v for v in vertices}

    def key_map(section):
        out = {}
        for k, v in (data.get(section) or {}).items():
            if str(k) not in by_str:
                raise InputError(f"{section} references unknown vertex {k!r}")
            out[by_str[str(k)]] = float(v)
        return out

    edges = [(by_str.get(str(x), x), by_str.get(str(y), y), w) for x, y, w in edges]
    return graph_spec(vertices, edges, c=key_map("killing"), m=key_map("measure"))


def graph_to_dict(spec: GraphSpec) -> dict:
    seen = set()
    edges = []
    for x in spec.vertices:
        for y, w in spec.neighbors(x):
            key = (x, y) if str(x) <= str(y) else (y, x)
            if key in seen:
                continue
            seen.add(key)
            edges.append([x, y, w])
    return {
        "vertices": list(spec.vertices),
        "edges": edges,
        "killing": {str(x): spec.c[x] for x in spec.vertices if spec.c[x] != 0.0},
        "measure": {str(x): spec.m[x] for x in spec.vertices if spec.m[x] != 1.0},
    }


def load_graph(path) -> GraphSpec:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as e:
        raise InputError(f"cannot read graph file: {e}") from None
    except json.JSONDecodeError as e:
        raise InputError(f"graph file is not valid JSON: {e}") from None
    return graph_from_dict(data)


# ---------------------------------------------------------------------------
# families


def family_from_dict(data: dict) -> GraphFamily:
    if isinstance(data, str):
        return family_from_name(data)
    try:
        template = data["template"]
        params = dict(data.get("parameters") or {})
    except (KeyError, TypeError) as e:
        raise InputError(f"malformed family payload: {e}") from None
    if template == "explicit":
        return explicit_family(graph_from_dict(params["graph"]))
    if template in ("half_line", "integer_line"):
        ctor = half_line if template == "half_line" else integer_line
        if "p" in params and "b" not in params:
            if template == "half_line":
                return power_half_line(float(params["p"]))
            p = float(params["p"])
            return integer_line(lambda k: float(abs(k) + 1) ** p, params={"p": p})
        b = compile_rule(params.get("b", "1.0"))
        kw = {}
        if "c" in params:
            kw["killing"] = compile_rule(params["c"])
        if "m" in params:
            kw["measure"] = compile_rule(params["m"])
        return ctor(b, params=params, **kw)
    if template == "jacobi":
        return jacobi_counterexample(float(params.get("lambda", 1.0)))
    if template == "tree":
        return tree_family(int(params.get("branching", 3)))
    if template == "pendant_line":
        return pendant_decorated_power_line(
            float(params.get("p", 3.0)), int(params.get("every", 2)), int(params.get("chain_length", 2))
        )
    if template == "supergraph":
        base_data = params.get("base")
        if isinstance(base_data, str):
            base = family_from_name(base_data)
        else:
            base = family_from_dict({"template": params.get("base_template"), "parameters": base_data})
        if params.get("single_vertex"):
            return build_supergraph_single_vertex(base)
        return build_supergraph(base)
    raise InputError(f"unknown family template {template!r}")


def family_to_dict(family: GraphFamily) -> dict:
    return {"template": family.template, "parameters": _jsonable(family.params)}


def load_family(src) -> GraphFamily:
    """Resolve a family from a builtin name, a JSON file path, or a dict."""
    if isinstance(src, dict):
        return family_from_dict(src)
    text = str(src)
    if text.endswith(".json") or Path(text).exists():
        try:
            data = json.loads(Path(text).read_text())
        except OSError as e:
            raise InputError(f"cannot read family file: {e}") from None
        except json.JSONDecodeError as e:
            raise InputError(f"family file is not valid JSON: {e}") from None
        return family_from_dict(data)
    return family_from_name(text)


# ---------------------------------------------------------------------------
# manifests and reproducible outputs


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def canonical_json(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, separators=(",", ":"))


def make_manifest(command: str, params: dict) -> dict:
    return {"tool": "graphsc", "version": __version__, "command": command, "params": _jsonable(params)}


def manifest_hash(manifest: dict) -> str:
    return hashlib.sha256(canonical_json(manifest).encode()).hexdigest()[:16]


def write_json(path, payload: dict, mhash: str) -> None:
    body = dict(_jsonable(payload))
    body["manifest_hash"] = mhash
    Path(path).write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")


def write_csv(path, header, rows, mhash: str) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        fh.write(f"# manifest_hash={mhash}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in row])
