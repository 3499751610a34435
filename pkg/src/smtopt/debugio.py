"""Lossless JSON debug form of a Model, used for round-trip checks and
engine debugging.  Exact rationals are encoded as "p/q" strings."""

from __future__ import annotations

import json
from fractions import Fraction

from .model import (
    Const,
    Constraint,
    Disjunction,
    Div,
    Exp,
    Expr,
    Model,
    Neg,
    Objective,
    Origin,
    Pow,
    Product,
    Sense,
    Sub,
    Sum,
    Var,
    VarKind,
    Variable,
)


def _rat_str(r: Fraction) -> str:
    return str(r)


def _rat_from(s: str) -> Fraction:
    return Fraction(s)


def _expr_to(e: Expr):
    if isinstance(e, Const):
        return {"op": "const", "v": _rat_str(e.value)}
    if isinstance(e, Var):
        return {"op": "var", "id": e.vid}
    if isinstance(e, Sum):
        return {"op": "sum", "args": [_expr_to(c) for c in e.children]}
    if isinstance(e, Neg):
        return {"op": "neg", "a": _expr_to(e.child)}
    if isinstance(e, Product):
        return {"op": "product", "args": [_expr_to(c) for c in e.children]}
    if isinstance(e, Sub):
        return {"op": "sub", "a": _expr_to(e.a), "b": _expr_to(e.b)}
    if isinstance(e, Div):
        return {"op": "div", "a": _expr_to(e.a), "b": _expr_to(e.b)}
    if isinstance(e, Pow):
        return {"op": "pow", "a": _expr_to(e.base), "b": _expr_to(e.exponent)}
    if isinstance(e, Exp):
        return {"op": "exp", "a": _expr_to(e.child)}
    raise TypeError(f"not an expression: {e!r}")


def _expr_from(d) -> Expr:
    op = d["op"]
    if op == "const":
        return Const(_rat_from(d["v"]))
    if op == "var":
        return Var(d["id"])
    if op == "sum":
        return Sum(tuple(_expr_from(a) for a in d["args"]))
    if op == "neg":
        return Neg(_expr_from(d["a"]))
    if op == "product":
        return Product(tuple(_expr_from(a) for a in d["args"]))
    if op == "sub":
        return Sub(_expr_from(d["a"]), _expr_from(d["b"]))
    if op == "div":
        return Div(_expr_from(d["a"]), _expr_from(d["b"]))
    if op == "pow":
        return Pow(_expr_from(d["a"]), _expr_from(d["b"]))
    if op == "exp":
        return Exp(_expr_from(d["a"]))
    raise ValueError(f"unknown op {op!r}")


def _bound_to(b):
    return None if b is None else _rat_str(b)


def _bound_from(s):
    return None if s is None else _rat_from(s)


def _con_to(c: Constraint):
    return {"body": _expr_to(c.body), "lo": _bound_to(c.lower),
            "hi": _bound_to(c.upper), "origin": c.origin.value}


def _con_from(d) -> Constraint:
    return Constraint(_expr_from(d["body"]), _bound_from(d["lo"]),
                      _bound_from(d["hi"]), Origin(d["origin"]))


def dump_model(model: Model) -> str:
    doc = {
        "variables": [
            {"name": v.name, "kind": v.kind.value,
             "lo": _bound_to(v.lower), "hi": _bound_to(v.upper)}
            for v in model.variables
        ],
        "constraints": [_con_to(c) for c in model.constraints],
        "disjunctions": [
            {"options": [_con_to(o) for o in d.options], "origin": d.origin.value}
            for d in model.disjunctions
        ],
        "objective": {
            "sense": model.objective.sense.value,
            "body": _expr_to(model.objective.body),
            "constant": _rat_str(model.objective.constant),
        },
        "report_negated": model.report_negated,
    }
    return json.dumps(doc, indent=1)


def load_model(text: str) -> Model:
    doc = json.loads(text)
    variables = tuple(
        Variable(vid=i, name=v["name"], kind=VarKind(v["kind"]),
                 lower=_bound_from(v["lo"]), upper=_bound_from(v["hi"]))
        for i, v in enumerate(doc["variables"])
    )
    constraints = tuple(_con_from(c) for c in doc["constraints"])
    disjunctions = tuple(
        Disjunction(tuple(_con_from(o) for o in d["options"]),
                    Origin(d["origin"]))
        for d in doc["disjunctions"]
    )
    obj = Objective(Sense(doc["objective"]["sense"]),
                    _expr_from(doc["objective"]["body"]),
                    _rat_from(doc["objective"]["constant"]))
    return Model(variables=variables, constraints=constraints,
                 objective=obj, disjunctions=disjunctions,
                 report_negated=doc["report_negated"])
