"""Exact-arithmetic representation of MINLP problems.

All numeric values are :class:`fractions.Fraction`; missing bounds are
``None`` (never a sentinel float).  Models, expression trees and
assignments are immutable and safe to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Optional, Union

from .errors import DivisionByZero, NonRationalValue

Rat = Fraction
#: A bound that may be absent (None = -inf for lowers, +inf for uppers).
Bound = Optional[Fraction]


class VarKind(Enum):
    CONTINUOUS = "C"
    INTEGER = "I"
    BINARY = "B"


class Sense(Enum):
    MINIMIZE = "min"
    MAXIMIZE = "max"


class Origin(Enum):
    PARSED = "parsed"
    BINARIZATION = "binarization"
    FLATTENING = "flattening"
    CUT = "cut"


# --- expression trees ---

@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Var:
    vid: int


@dataclass(frozen=True)
class Sum:
    children: tuple


@dataclass(frozen=True)
class Neg:
    child: "Expr"


@dataclass(frozen=True)
class Product:
    children: tuple


@dataclass(frozen=True)
class Sub:
    a: "Expr"
    b: "Expr"


@dataclass(frozen=True)
class Div:
    a: "Expr"
    b: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: "Expr"


@dataclass(frozen=True)
class Exp:
    child: "Expr"


Expr = Union[Const, Var, Sum, Neg, Product, Sub, Div, Pow, Exp]


def const(x) -> Const:
    return Const(Fraction(x))


def mksum(children) -> Expr:
    children = tuple(children)
    if not children:
        return Const(Fraction(0))
    if len(children) == 1:
        return children[0]
    return Sum(children)


def mkproduct(children) -> Expr:
    children = tuple(children)
    if not children:
        return Const(Fraction(1))
    if len(children) == 1:
        return children[0]
    return Product(children)


@dataclass(frozen=True)
class Variable:
    vid: int
    name: str
    kind: VarKind
    lower: Bound
    upper: Bound

    def __post_init__(self):
        if self.lower is not None and self.upper is not None:
            assert self.lower <= self.upper, f"{self.name}: lower > upper"
        if self.kind is VarKind.BINARY:
            assert self.lower == 0 and self.upper == 1, \
                f"{self.name}: binary variables must have bounds [0, 1]"


@dataclass(frozen=True)
class Constraint:
    body: Expr
    lower: Bound
    upper: Bound
    origin: Origin = Origin.PARSED

    def __post_init__(self):
        assert self.lower is not None or self.upper is not None, \
            "constraint needs at least one finite bound"


@dataclass(frozen=True)
class Disjunction:
    """At least one of the options must hold (e.g. flattening's b=0 or b=1)."""
    options: tuple  # tuple[Constraint, ...]
    origin: Origin = Origin.FLATTENING


@dataclass(frozen=True)
class Objective:
    sense: Sense
    body: Expr
    constant: Fraction = Fraction(0)


@dataclass(frozen=True)
class Model:
    variables: tuple  # tuple[Variable, ...]
    constraints: tuple  # tuple[Constraint, ...]
    objective: Objective
    disjunctions: tuple = ()  # tuple[Disjunction, ...]
    # Set by normalize_to_min when a Maximize objective was negated; the
    # reported optimum must be negated back at the output boundary.
    report_negated: bool = False

    def __post_init__(self):
        names = [v.name for v in self.variables]
        assert len(names) == len(set(names)), "variable names must be unique"
        for i, v in enumerate(self.variables):
            assert v.vid == i, "variable ids must be dense and ordered"
        n = len(self.variables)
        for c in self.constraints:
            for vid in variables_in(c.body):
                assert 0 <= vid < n, f"constraint references undeclared var {vid}"
        for vid in variables_in(self.objective.body):
            assert 0 <= vid < n, f"objective references undeclared var {vid}"

    @property
    def has_integer_vars(self) -> bool:
        return any(v.kind is not VarKind.CONTINUOUS for v in self.variables)

    def variable_by_name(self, name: str) -> Variable:
        for v in self.variables:
            if v.name == name:
                return v
        raise KeyError(name)


class ProblemClass(Enum):
    LP = "LP"
    NLP = "NLP"
    ILP = "ILP"
    INLP = "INLP"
    MILP = "MILP"
    MINLP = "MINLP"
    BLP = "BLP"
    BNLP = "BNLP"
    MBLP = "MBLP"
    MBNLP = "MBNLP"


#: Assignment of exact rational values, keyed by variable id.
Assignment = dict


def variables_in(expr: Expr) -> set:
    """Set of variable ids referenced by the tree."""
    out = set()
    stack = [expr]
    while stack:
        e = stack.pop()
        if isinstance(e, Var):
            out.add(e.vid)
        elif isinstance(e, (Sum, Product)):
            stack.extend(e.children)
        elif isinstance(e, Neg):
            stack.append(e.child)
        elif isinstance(e, (Sub, Div)):
            stack.append(e.a)
            stack.append(e.b)
        elif isinstance(e, Pow):
            stack.append(e.base)
            stack.append(e.exponent)
        elif isinstance(e, Exp):
            stack.append(e.child)
    return out


def _degree(expr: Expr) -> Optional[int]:
    """Polynomial degree of the tree, or None if not a polynomial with
    constant divisors (Pow and Exp nodes are treated as non-linear
    outright, matching the classification contract)."""
    if isinstance(expr, Const):
        return 0
    if isinstance(expr, Var):
        return 1
    if isinstance(expr, (Sum,)):
        degs = [_degree(c) for c in expr.children]
        return None if any(d is None for d in degs) else max(degs)
    if isinstance(expr, Sub):
        da, db = _degree(expr.a), _degree(expr.b)
        return None if da is None or db is None else max(da, db)
    if isinstance(expr, Neg):
        return _degree(expr.child)
    if isinstance(expr, Product):
        degs = [_degree(c) for c in expr.children]
        return None if any(d is None for d in degs) else sum(degs)
    if isinstance(expr, Div):
        da, db = _degree(expr.a), _degree(expr.b)
        if da is None or db is None or db != 0:
            return None  # division by a variable expression
        return da
    return None  # Pow, Exp


def is_linear(expr: Expr) -> bool:
    d = _degree(expr)
    return d is not None and d <= 1


def classify(model: Model) -> ProblemClass:
    """Problem subtype: linearity from the trees, integrality from kinds."""
    linear = is_linear(model.objective.body) and all(
        is_linear(c.body) for c in model.constraints
    ) and all(
        is_linear(opt.body) for d in model.disjunctions for opt in d.options
    )
    kinds = {v.kind for v in model.variables}
    has_cont = VarKind.CONTINUOUS in kinds
    has_noncont = bool(kinds - {VarKind.CONTINUOUS})
    all_binary = has_noncont and VarKind.INTEGER not in kinds

    if not has_noncont:
        return ProblemClass.LP if linear else ProblemClass.NLP
    if not has_cont:
        if all_binary:
            return ProblemClass.BLP if linear else ProblemClass.BNLP
        return ProblemClass.ILP if linear else ProblemClass.INLP
    if all_binary:
        return ProblemClass.MBLP if linear else ProblemClass.MBNLP
    return ProblemClass.MILP if linear else ProblemClass.MINLP


def normalize_to_min(model: Model) -> Model:
    """Flip a Maximize objective into Minimize(negated body).  Idempotent;
    sets report_negated so output code can undo the negation."""
    if model.objective.sense is Sense.MINIMIZE:
        return model
    obj = Objective(
        sense=Sense.MINIMIZE,
        body=Neg(model.objective.body),
        constant=-model.objective.constant,
    )
    return replace(model, objective=obj, report_negated=not model.report_negated)


def eval_expr(expr: Expr, a: Assignment) -> Fraction:
    """Exact rational value of the tree under assignment ``a``."""
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Var):
        return a[expr.vid]
    if isinstance(expr, Sum):
        return sum((eval_expr(c, a) for c in expr.children), Fraction(0))
    if isinstance(expr, Neg):
        return -eval_expr(expr.child, a)
    if isinstance(expr, Product):
        out = Fraction(1)
        for c in expr.children:
            out *= eval_expr(c, a)
        return out
    if isinstance(expr, Sub):
        return eval_expr(expr.a, a) - eval_expr(expr.b, a)
    if isinstance(expr, Div):
        denom = eval_expr(expr.b, a)
        if denom == 0:
            raise DivisionByZero("division by zero")
        return eval_expr(expr.a, a) / denom
    if isinstance(expr, Pow):
        k = eval_expr(expr.exponent, a)
        if k.denominator != 1:
            raise NonRationalValue(f"non-integer exponent {k}")
        base = eval_expr(expr.base, a)
        if base == 0 and k < 0:
            raise DivisionByZero("zero base with negative exponent")
        return base ** int(k)
    if isinstance(expr, Exp):
        raise NonRationalValue("Exp has no exact rational value")
    raise TypeError(f"not an expression: {expr!r}")


def objective_value(model: Model, a: Assignment) -> Fraction:
    return eval_expr(model.objective.body, a) + model.objective.constant


def violated_integrality(model: Model, a: Assignment):
    """All (vid, value) pairs where an Integer/Binary variable holds a
    fractional value, ordered by variable id."""
    out = []
    for v in model.variables:
        if v.kind is VarKind.CONTINUOUS:
            continue
        val = a[v.vid]
        if val.denominator != 1:
            out.append((v.vid, val))
    return out


def _constraint_ok(c: Constraint, a: Assignment, tol: Fraction) -> bool:
    val = eval_expr(c.body, a)
    if c.lower is not None and val < c.lower - tol:
        return False
    if c.upper is not None and val > c.upper + tol:
        return False
    return True


def check_feasible_point(model: Model, a: Assignment, tol: Fraction) -> bool:
    """True iff all constraints hold within tol, every disjunction has a
    satisfied option, variable bounds hold within tol, and integrality
    kinds hold exactly."""
    for v in model.variables:
        val = a[v.vid]
        if v.lower is not None and val < v.lower - tol:
            return False
        if v.upper is not None and val > v.upper + tol:
            return False
        if v.kind is not VarKind.CONTINUOUS and val.denominator != 1:
            return False
    for c in model.constraints:
        if not _constraint_ok(c, a, tol):
            return False
    for d in model.disjunctions:
        if not any(_constraint_ok(opt, a, tol) for opt in d.options):
            return False
    return True
