"""JSON instance files, result files and atomic writes.

Instance layout::

    {"name": ...,
     "variables": [{"name", "lb", "ub", "integer"}],
     "objective": {var: coef},
     "constraints": [{"name", "coefficients": {var: coef}, "sense": "geq"|"leq"|"eq", "rhs"}],
     "nonlinearities": [{"name", "inputs": [var], "output": var, "lipschitz",
                         "norm": {"kind", "weights"}, "oracle": {"registry", "params"}}]}
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .model import LinearPart, LipschitzMinlp, NonlinearityBinding, NormSpec, VariableSpec
from .oracles import make_oracle

SENSES = ("geq", "leq", "eq")


class InstanceFormatError(ValueError):
    """Malformed instance document; the message names the offending location."""


def atomic_write_text(path, text: str, newline: str | None = None) -> None:
    """Write ``text`` to a temporary file next to ``path`` and rename it into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline=newline) as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(obj) -> str:
    """Deterministic JSON; non-finite floats become null."""
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def load_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") \
            from None


def _need(d, key, where):
    if not isinstance(d, dict) or key not in d:
        raise InstanceFormatError(f"{where}: missing key {key!r}")
    return d[key]


def problem_from_dict(doc: dict) -> LipschitzMinlp:
    if not isinstance(doc, dict):
        raise InstanceFormatError("top level: expected an object")
    variables = []
    index = {}
    for k, v in enumerate(_need(doc, "variables", "top level")):
        where = f"variables[{k}]"
        name = str(_need(v, "name", where))
        if name in index:
            raise InstanceFormatError(f"{where}: duplicate variable {name!r}")
        try:
            lb, ub = float(_need(v, "lb", where)), float(_need(v, "ub", where))
        except (TypeError, ValueError):
            raise InstanceFormatError(f"{where}: bounds must be numbers") from None
        index[name] = k
        variables.append(VariableSpec(name, lb, ub, bool(v.get("integer", False))))
    n = len(variables)

    def col(name, where):
        if name not in index:
            raise InstanceFormatError(f"{where}: unknown variable {name!r}")
        return index[name]

    c = np.zeros(n)
    for name, coef in doc.get("objective", {}).items():
        c[col(name, "objective")] += float(coef)
    rows, rhs = [], []
    for k, con in enumerate(doc.get("constraints", [])):
        where = f"constraints[{k}]"
        row = np.zeros(n)
        for name, coef in _need(con, "coefficients", where).items():
            row[col(name, where)] += float(coef)
        b = float(_need(con, "rhs", where))
        sense = con.get("sense", "geq")
        if sense not in SENSES:
            raise InstanceFormatError(f"{where}: sense must be one of {SENSES}")
        if sense in ("geq", "eq"):
            rows.append(row)
            rhs.append(b)
        if sense in ("leq", "eq"):
            rows.append(-row)
            rhs.append(-b)
    bindings = []
    for k, nl in enumerate(doc.get("nonlinearities", [])):
        where = f"nonlinearities[{k}]"
        inputs = [col(v, where) for v in _need(nl, "inputs", where)]
        output = col(_need(nl, "output", where), where)
        spec = _need(nl, "oracle", where)
        try:
            oracle = make_oracle(_need(spec, "registry", where), spec.get("params", {}))
            norm_d = nl.get("norm", {"kind": "weighted-one-norm", "weights": [1.0] * len(inputs)})
            norm = NormSpec(norm_d["kind"], tuple(norm_d["weights"]))
            hook = keep = None
            if hasattr(oracle, "local_norm"):
                def hook(box, o=oracle):
                    return o.local_norm(box.lower, box.upper)
            if hasattr(oracle, "keep_box"):
                lo_out, hi_out = variables[output].lower, variables[output].upper

                def keep(box, o=oracle, lo=lo_out, hi=hi_out):
                    return o.keep_box(box.lower, box.upper, lo, hi)
            bindings.append(NonlinearityBinding(
                inputs, output, oracle, float(nl.get("lipschitz", 1.0)), norm, hook, keep,
                name=str(nl.get("name", f"f{k}"))))
        except InstanceFormatError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise InstanceFormatError(f"{where}: {exc}") from None
    A = np.array(rows) if rows else np.zeros((0, n))
    return LipschitzMinlp(variables, LinearPart(c, A, np.array(rhs)), bindings,
                          name=str(doc.get("name", "")))


def problem_to_dict(problem: LipschitzMinlp) -> dict:
    names = [v.name for v in problem.variables]
    doc = {
        "name": problem.name,
        "variables": [{"name": v.name, "lb": v.lower, "ub": v.upper, "integer": v.integral}
                      for v in problem.variables],
        "objective": {names[j]: float(c) for j, c in enumerate(problem.linear.objective) if c},
        "constraints": [
            {"name": f"r{k}", "sense": "geq", "rhs": float(problem.linear.rhs[k]),
             "coefficients": {names[j]: float(a) for j, a in enumerate(row) if a}}
            for k, row in enumerate(problem.linear.rows)],
        "nonlinearities": [],
    }
    for b in problem.nonlinearities:
        doc["nonlinearities"].append({
            "name": b.name, "inputs": [names[j] for j in b.inputs], "output": names[b.output],
            "lipschitz": b.lipschitz, "norm": b.norm.to_dict(), "oracle": b.oracle.to_dict()})
    return doc


def load_problem(path) -> LipschitzMinlp:
    return problem_from_dict(load_json(path))


def load_point(path, n: int | None = None) -> np.ndarray:
    """A point file is either a JSON list or an object with a ``point`` entry."""
    doc = load_json(path)
    pt = doc.get("point") if isinstance(doc, dict) else doc
    if pt is None:
        raise InstanceFormatError(f"{path}: no point")
    try:
        x = np.asarray(pt, dtype=float).reshape(-1)
    except (TypeError, ValueError):
        raise InstanceFormatError(f"{path}: point must be a list of numbers") from None
    if n is not None and x.shape[0] != n:
        raise InstanceFormatError(f"{path}: point has {x.shape[0]} entries, expected {n}")
    return x
