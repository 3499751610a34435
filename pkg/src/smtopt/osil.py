"""Parser for the OSiL XML subset the engine needs.

Supported: variables, a single objective, constraint rows, the sparse
linear coefficient matrix (row- or column-major), quadratic term lists and
nonlinear expression trees over {plus, sum, minus, negate, times, product,
divide, power, square, exp, number, variable}.  Anything else is a hard
error; a silent mis-parse would corrupt optima.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from fractions import Fraction
from typing import Optional

from .errors import (
    InconsistentCounts,
    MalformedDocument,
    MultipleObjectives,
    UnsupportedOperator,
)
from .model import (
    Const,
    Constraint,
    Div,
    Exp,
    Expr,
    Model,
    Neg,
    Objective,
    Pow,
    ProblemClass,
    Product,
    Sense,
    Sub,
    Sum,
    Var,
    VarKind,
    Variable,
    classify,
    mkproduct,
    mksum,
)

_KINDS = {"C": VarKind.CONTINUOUS, "I": VarKind.INTEGER, "B": VarKind.BINARY}


def _tag(elem) -> str:
    return elem.tag.split("}")[-1]


def _find(parent, name):
    for child in parent:
        if _tag(child) == name:
            return child
    return None


def _find_all(parent, name):
    return [child for child in parent if _tag(child) == name]


def _rat(text: str) -> Fraction:
    text = text.strip()
    try:
        # Fraction handles integers, decimals and scientific notation exactly.
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as e:
        raise MalformedDocument(f"bad numeric literal {text!r}") from e


def _bound(text: Optional[str], default: Optional[Fraction]) -> Optional[Fraction]:
    if text is None:
        return default
    t = text.strip().upper()
    if t in ("INF", "+INF", "1E308"):
        return None
    if t == "-INF":
        return None
    return _rat(text)


def _read_el_array(parent) -> list:
    """<el> array with OSiL's mult/incr run-length attributes."""
    out = []
    for el in _find_all(parent, "el"):
        mult = int(el.get("mult", "1"))
        incr = int(el.get("incr", "0"))
        base = _rat(el.text or "0")
        for i in range(mult):
            out.append(base + incr * i)
    return out


_NL_LEAVES = {"number", "variable"}
_NL_OPS = {"plus", "sum", "minus", "negate", "times", "product",
           "divide", "power", "square", "exp"}


def _parse_nl(elem, nvars: int) -> Expr:
    tag = _tag(elem)
    if tag == "number":
        return Const(_rat(elem.get("value", "0")))
    if tag == "variable":
        idx = int(elem.get("idx"))
        if not 0 <= idx < nvars:
            raise MalformedDocument(f"variable idx {idx} out of range")
        coef = _rat(elem.get("coef", "1"))
        if coef == 1:
            return Var(idx)
        return Product((Const(coef), Var(idx)))
    if tag not in _NL_OPS:
        raise UnsupportedOperator(tag)
    children = [_parse_nl(c, nvars) for c in elem]
    if tag == "plus":
        if len(children) != 2:
            raise MalformedDocument("plus expects 2 operands")
        return Sum(tuple(children))
    if tag == "sum":
        return mksum(children)
    if tag == "minus":
        if len(children) != 2:
            raise MalformedDocument("minus expects 2 operands")
        return Sub(children[0], children[1])
    if tag == "negate":
        if len(children) != 1:
            raise MalformedDocument("negate expects 1 operand")
        return Neg(children[0])
    if tag == "times":
        if len(children) != 2:
            raise MalformedDocument("times expects 2 operands")
        return Product(tuple(children))
    if tag == "product":
        return mkproduct(children)
    if tag == "divide":
        if len(children) != 2:
            raise MalformedDocument("divide expects 2 operands")
        return Div(children[0], children[1])
    if tag == "power":
        if len(children) != 2:
            raise MalformedDocument("power expects 2 operands")
        return Pow(children[0], children[1])
    if tag == "square":
        if len(children) != 1:
            raise MalformedDocument("square expects 1 operand")
        return Pow(children[0], Const(Fraction(2)))
    if tag == "exp":
        if len(children) != 1:
            raise MalformedDocument("exp expects 1 operand")
        return Exp(children[0])
    raise UnsupportedOperator(tag)


def parse_osil(data: bytes, free_variables: bool = False) -> Model:
    """Parse OSiL bytes into a Model.

    free_variables overrides the schema's default variable lower bound of 0
    with -infinity, for corpora that assume free variables.
    """
    try:
        root = ET.fromstring(data)
    except ET.ParseError as e:
        raise MalformedDocument(f"not well-formed XML: {e}") from e
    idata = _find(root, "instanceData")
    if idata is None:
        raise MalformedDocument("missing <instanceData>")

    # variables
    vars_elem = _find(idata, "variables")
    if vars_elem is None:
        raise MalformedDocument("missing <variables>")
    default_lb = None if free_variables else Fraction(0)
    variables = []
    for i, v in enumerate(_find_all(vars_elem, "var")):
        kind_code = v.get("type", "C")
        if kind_code not in _KINDS:
            raise MalformedDocument(f"unknown variable type {kind_code!r}")
        kind = _KINDS[kind_code]
        if kind is VarKind.BINARY:
            lb, ub = Fraction(0), Fraction(1)
        else:
            lb = _bound(v.get("lb"), default_lb)
            if v.get("lb", "").strip().upper() == "-INF":
                lb = None
            ub = _bound(v.get("ub"), None)
        variables.append(Variable(
            vid=i, name=v.get("name", f"x{i}"), kind=kind, lower=lb, upper=ub))
    declared = vars_elem.get("numberOfVariables")
    if declared is not None and int(declared) != len(variables):
        raise InconsistentCounts(
            f"numberOfVariables={declared} but {len(variables)} <var> elements")
    nvars = len(variables)

    # objective
    objs_elem = _find(idata, "objectives")
    obj_sense = Sense.MINIMIZE
    obj_constant = Fraction(0)
    obj_terms: list = []
    if objs_elem is not None:
        objs = _find_all(objs_elem, "obj")
        declared = objs_elem.get("numberOfObjectives")
        if declared is not None and int(declared) != len(objs):
            raise InconsistentCounts(
                f"numberOfObjectives={declared} but {len(objs)} <obj> elements")
        if len(objs) > 1:
            raise MultipleObjectives(f"{len(objs)} objectives declared")
        if objs:
            obj = objs[0]
            obj_sense = Sense.MAXIMIZE if obj.get("maxOrMin", "min") == "max" \
                else Sense.MINIMIZE
            obj_constant = _rat(obj.get("constant", "0"))
            coefs = _find_all(obj, "coef")
            declared_coefs = obj.get("numberOfObjCoef")
            if declared_coefs is not None and int(declared_coefs) != len(coefs):
                raise InconsistentCounts(
                    f"numberOfObjCoef={declared_coefs} but {len(coefs)} <coef>")
            for c in coefs:
                idx = int(c.get("idx"))
                if not 0 <= idx < nvars:
                    raise MalformedDocument(f"objective coef idx {idx} out of range")
                val = _rat(c.text or "0")
                if val != 0:
                    obj_terms.append(
                        Var(idx) if val == 1 else Product((Const(val), Var(idx))))

    # constraint rows
    cons_elem = _find(idata, "constraints")
    rows = []
    if cons_elem is not None:
        cons = _find_all(cons_elem, "con")
        declared = cons_elem.get("numberOfConstraints")
        if declared is not None and int(declared) != len(cons):
            raise InconsistentCounts(
                f"numberOfConstraints={declared} but {len(cons)} <con> elements")
        for c in cons:
            lb = _bound(c.get("lb"), None)
            ub = _bound(c.get("ub"), None)
            rows.append((lb, ub))
    nrows = len(rows)
    row_terms: list = [[] for _ in range(nrows)]

    # linear coefficient matrix
    lin = _find(idata, "linearConstraintCoefficients")
    if lin is not None:
        start_el = _find(lin, "start")
        value_el = _find(lin, "value")
        row_idx_el = _find(lin, "rowIdx")
        col_idx_el = _find(lin, "colIdx")
        if start_el is None or value_el is None:
            raise MalformedDocument("linear coefficients need <start> and <value>")
        if (row_idx_el is None) == (col_idx_el is None):
            raise MalformedDocument(
                "linear coefficients need exactly one of <rowIdx>/<colIdx>")
        start = [int(x) for x in _read_el_array(start_el)]
        values = _read_el_array(value_el)
        idxs = [int(x) for x in
                _read_el_array(row_idx_el if row_idx_el is not None else col_idx_el)]
        declared = lin.get("numberOfValues")
        if declared is not None and int(declared) != len(values):
            raise InconsistentCounts(
                f"numberOfValues={declared} but {len(values)} values")
        if len(idxs) != len(values):
            raise InconsistentCounts("index and value arrays differ in length")
        column_major = row_idx_el is not None
        outer_count = nvars if column_major else nrows
        if len(start) != outer_count + 1:
            raise InconsistentCounts(
                f"<start> has {len(start)} entries, expected {outer_count + 1}")
        for outer in range(outer_count):
            for k in range(start[outer], start[outer + 1]):
                coef = values[k]
                if coef == 0:
                    continue
                if column_major:
                    row, col = idxs[k], outer
                else:
                    row, col = outer, idxs[k]
                if not 0 <= col < nvars:
                    raise MalformedDocument(f"column index {col} out of range")
                term = Var(col) if coef == 1 else Product((Const(coef), Var(col)))
                if row == -1:
                    obj_terms.append(term)
                elif 0 <= row < nrows:
                    row_terms[row].append(term)
                else:
                    raise MalformedDocument(f"row index {row} out of range")

    # quadratic tuple list
    quad = _find(idata, "quadraticCoefficients")
    if quad is not None:
        qterms = _find_all(quad, "qTerm")
        declared = quad.get("numberOfQuadraticTerms")
        if declared is not None and int(declared) != len(qterms):
            raise InconsistentCounts(
                f"numberOfQuadraticTerms={declared} but {len(qterms)} <qTerm>")
        for q in qterms:
            row = int(q.get("idx"))
            i1, i2 = int(q.get("idxOne")), int(q.get("idxTwo"))
            coef = _rat(q.get("coef", "1"))
            if not (0 <= i1 < nvars and 0 <= i2 < nvars):
                raise MalformedDocument("quadratic term index out of range")
            if i1 == i2:
                core: Expr = Pow(Var(i1), Const(Fraction(2)))
            else:
                core = Product((Var(i1), Var(i2)))
            term = core if coef == 1 else Product((Const(coef), core))
            if row == -1:
                obj_terms.append(term)
            elif 0 <= row < nrows:
                row_terms[row].append(term)
            else:
                raise MalformedDocument(f"quadratic row index {row} out of range")

    # nonlinear expression trees
    nl_root = _find(idata, "nonlinearExpressions")
    if nl_root is not None:
        nls = _find_all(nl_root, "nl")
        declared = nl_root.get("numberOfNonlinearExpressions")
        if declared is not None and int(declared) != len(nls):
            raise InconsistentCounts(
                f"numberOfNonlinearExpressions={declared} but {len(nls)} <nl>")
        for nl in nls:
            row = int(nl.get("idx"))
            kids = list(nl)
            if len(kids) != 1:
                raise MalformedDocument("<nl> must contain exactly one tree")
            tree = _parse_nl(kids[0], nvars)
            if row == -1:
                obj_terms.append(tree)
            elif 0 <= row < nrows:
                row_terms[row].append(tree)
            else:
                raise MalformedDocument(f"nonlinear row index {row} out of range")

    constraints = []
    for (lb, ub), terms in zip(rows, row_terms):
        if lb is None and ub is None:
            continue  # free row
        constraints.append(Constraint(body=mksum(terms), lower=lb, upper=ub))

    objective = Objective(sense=obj_sense, body=mksum(obj_terms),
                          constant=obj_constant)
    return Model(variables=tuple(variables), constraints=tuple(constraints),
                 objective=objective)


def detect_class_and_vector_set(model: Model) -> tuple:
    """(problem class, portfolio hint): 'nlp' iff the model has no
    Integer/Binary variables, else 'minlp'."""
    pclass = classify(model)
    hint = "minlp" if model.has_integer_vars else "nlp"
    return pclass, hint
