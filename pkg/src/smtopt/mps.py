"""MPS reader for linear models (the MIPLIB-documented dialect).

Free-format (whitespace-separated) parsing; fixed-format files read fine
through the same path because their fields never contain spaces in
practice.  Sections: NAME, OBJSENSE, ROWS, COLUMNS (with INTORG/INTEND
markers), RHS, RANGES, BOUNDS, ENDATA.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .errors import (
    DuplicateRow,
    MalformedField,
    UnknownRowReference,
    UnknownSection,
)
from .model import (
    Const,
    Constraint,
    Model,
    Objective,
    Product,
    Sense,
    Var,
    VarKind,
    Variable,
    mksum,
)

_SECTIONS = {"NAME", "OBJSENSE", "OBJSENSE:", "ROWS", "COLUMNS", "RHS",
             "RANGES", "BOUNDS", "ENDATA", "SOS"}


class _Row:
    __slots__ = ("name", "kind", "terms", "rhs", "range_")

    def __init__(self, name: str, kind: str):
        self.name = name
        self.kind = kind  # N, L, G, E
        self.terms: list = []  # (vid, coef)
        self.rhs: Optional[Fraction] = None
        self.range_: Optional[Fraction] = None


class _Col:
    __slots__ = ("name", "vid", "integer", "lower", "upper", "kind_forced")

    def __init__(self, name: str, vid: int, integer: bool):
        self.name = name
        self.vid = vid
        self.integer = integer
        self.lower: Optional[Fraction] = Fraction(0)
        self.upper: Optional[Fraction] = None
        self.kind_forced: Optional[VarKind] = None


def _num(token: str, lineno: int) -> Fraction:
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise MalformedField(lineno, f"bad numeric field {token!r}")


def parse_mps(text: str) -> Model:
    rows: dict = {}
    row_order: list = []
    cols: dict = {}
    col_order: list = []
    obj_row: Optional[_Row] = None
    obj_constant = Fraction(0)
    sense = Sense.MINIMIZE
    section = None
    in_integer_block = False

    lines = text.splitlines()
    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip() or raw.lstrip().startswith("*"):
            continue
        is_header = raw[0] not in " \t"
        tokens = raw.split()

        if is_header:
            header = tokens[0].upper()
            if header == "NAME":
                section = "NAME"
                continue
            if header == "OBJSENSE":
                section = "OBJSENSE"
                if len(tokens) > 1:
                    sense = Sense.MAXIMIZE if tokens[1].upper().startswith("MAX") \
                        else Sense.MINIMIZE
                continue
            if header in ("ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS"):
                section = header
                continue
            if header == "ENDATA":
                break
            raise UnknownSection(f"line {lineno}: unknown section {header!r}")

        if section == "OBJSENSE":
            sense = Sense.MAXIMIZE if tokens[0].upper().startswith("MAX") \
                else Sense.MINIMIZE
            continue

        if section == "ROWS":
            if len(tokens) != 2:
                raise MalformedField(lineno, f"ROWS line needs 2 fields: {raw!r}")
            kind, name = tokens[0].upper(), tokens[1]
            if kind not in ("N", "L", "G", "E"):
                raise MalformedField(lineno, f"unknown row type {kind!r}")
            if name in rows:
                raise DuplicateRow(f"line {lineno}: duplicate row {name!r}")
            row = _Row(name, kind)
            rows[name] = row
            if kind == "N":
                if obj_row is None:
                    obj_row = row  # first N row is the objective
            else:
                row_order.append(row)
            continue

        if section == "COLUMNS":
            if len(tokens) >= 3 and tokens[1].upper() == "'MARKER'":
                marker = tokens[2].strip("'").upper()
                if marker == "INTORG":
                    in_integer_block = True
                elif marker == "INTEND":
                    in_integer_block = False
                else:
                    raise MalformedField(lineno, f"unknown marker {marker!r}")
                continue
            if "'MARKER'" in raw:
                marker = "INTORG" if "INTORG" in raw.upper() else \
                    ("INTEND" if "INTEND" in raw.upper() else "")
                if marker == "INTORG":
                    in_integer_block = True
                    continue
                if marker == "INTEND":
                    in_integer_block = False
                    continue
            if len(tokens) < 3 or len(tokens) % 2 == 0:
                raise MalformedField(lineno, f"bad COLUMNS line: {raw!r}")
            cname = tokens[0]
            if cname not in cols:
                col = _Col(cname, len(col_order), in_integer_block)
                cols[cname] = col
                col_order.append(col)
            col = cols[cname]
            for i in range(1, len(tokens), 2):
                rname, val = tokens[i], _num(tokens[i + 1], lineno)
                if rname not in rows:
                    raise UnknownRowReference(
                        f"line {lineno}: unknown row {rname!r}")
                rows[rname].terms.append((col.vid, val))
            continue

        if section == "RHS":
            # first token is the RHS set name; tolerate its omission
            start = 1 if len(tokens) % 2 == 1 else 0
            for i in range(start, len(tokens), 2):
                rname, val = tokens[i], _num(tokens[i + 1], lineno)
                if rname not in rows:
                    raise UnknownRowReference(
                        f"line {lineno}: unknown row {rname!r}")
                if rows[rname].kind == "N":
                    # MPS convention: RHS on the objective row is the
                    # negated objective constant.
                    obj_constant = -val
                else:
                    rows[rname].rhs = val
            continue

        if section == "RANGES":
            start = 1 if len(tokens) % 2 == 1 else 0
            for i in range(start, len(tokens), 2):
                rname, val = tokens[i], _num(tokens[i + 1], lineno)
                if rname not in rows:
                    raise UnknownRowReference(
                        f"line {lineno}: unknown row {rname!r}")
                rows[rname].range_ = val
            continue

        if section == "BOUNDS":
            btype = tokens[0].upper()
            no_value = btype in ("FR", "MI", "PL", "BV")
            expected = 3 if no_value else 4
            if len(tokens) != expected:
                # tolerate a missing bound-set name
                if len(tokens) == expected - 1:
                    tokens = [tokens[0], "BND", *tokens[1:]]
                else:
                    raise MalformedField(lineno, f"bad BOUNDS line: {raw!r}")
            cname = tokens[2]
            if cname not in cols:
                raise MalformedField(lineno, f"unknown column {cname!r}")
            col = cols[cname]
            val = _num(tokens[3], lineno) if not no_value else None
            if btype == "UP":
                col.upper = val
            elif btype == "LO":
                col.lower = val
            elif btype == "FX":
                col.lower = col.upper = val
            elif btype == "FR":
                col.lower = col.upper = None
            elif btype == "MI":
                col.lower = None
            elif btype == "PL":
                col.upper = None
            elif btype == "BV":
                col.kind_forced = VarKind.BINARY
                col.lower, col.upper = Fraction(0), Fraction(1)
            elif btype == "UI":
                col.integer = True
                col.upper = val
            elif btype == "LI":
                col.integer = True
                col.lower = val
            else:
                raise MalformedField(lineno, f"unknown bound type {btype!r}")
            continue

        if section in ("NAME", None):
            continue
        raise UnknownSection(f"line {lineno}: data before any known section")

    variables = []
    for col in col_order:
        kind = col.kind_forced or \
            (VarKind.INTEGER if col.integer else VarKind.CONTINUOUS)
        variables.append(Variable(
            vid=col.vid, name=col.name, kind=kind,
            lower=col.lower, upper=col.upper))

    def row_body(row: _Row):
        terms = []
        for vid, coef in row.terms:
            if coef == 0:
                continue
            terms.append(Var(vid) if coef == 1 else Product((Const(coef), Var(vid))))
        return mksum(terms)

    constraints = []
    for row in row_order:
        b = row.rhs if row.rhs is not None else Fraction(0)
        if row.kind == "L":
            lo, hi = None, b
        elif row.kind == "G":
            lo, hi = b, None
        else:  # E
            lo, hi = b, b
        if row.range_ is not None:
            r = row.range_
            if row.kind == "L":
                lo = b - abs(r)
            elif row.kind == "G":
                hi = b + abs(r)
            else:  # E
                lo, hi = (b, b + r) if r >= 0 else (b + r, b)
        constraints.append(Constraint(body=row_body(row), lower=lo, upper=hi))

    obj_body = row_body(obj_row) if obj_row is not None else mksum([])
    objective = Objective(sense=sense, body=obj_body, constant=obj_constant)
    return Model(variables=tuple(variables), constraints=tuple(constraints),
                 objective=objective)
