"""Preprocessing layer: binarization and the two flattening transforms.

All three are pure model-to-model functions.  Binarization replaces each
bounded integer variable x in [l, u] by q = 1 + ceil(log2(u - l)) bit
variables tied to x through the equality x = l + sum(2^(i-1) * b_i);
flattening then turns the remaining 0/1 integrality kinds into one
disjunction per bit so the SMT solver never sees an Int sort.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .errors import EmptyIntegerRange, NotBinarized, RangeTooWide, UnboundedInteger
from .model import (
    Const,
    Constraint,
    Disjunction,
    Model,
    Origin,
    Product,
    Sub,
    Var,
    VarKind,
    Variable,
    mksum,
)

NAIVE_FLATTEN_CAP = 1024


@dataclass(frozen=True)
class BinMap:
    """Per original integer variable: its tightened lower bound and the ids
    of the bit variables encoding its offset from that bound."""
    entries: dict  # vid -> (lower: Fraction, bit_vids: tuple[int, ...])

    def decode(self, vid: int, bits: dict) -> Fraction:
        lower, bit_vids = self.entries[vid]
        return lower + sum(
            Fraction(2) ** i * bits[b] for i, b in enumerate(bit_vids)
        )


def bit_count(width: int) -> int:
    """q = 1 + ceil(log2(width)) for width >= 1."""
    assert width >= 1
    return 1 + (width - 1).bit_length()


def _ceil(r: Fraction) -> int:
    return -((-r.numerator) // r.denominator)


def _floor(r: Fraction) -> int:
    return r.numerator // r.denominator


def binarize(model: Model) -> tuple:
    """Returns (binarized model, BinMap).

    Integer variables become Continuous with their (tightened) bounds kept;
    new 0/1 Integer bit variables and one equality constraint per variable
    carry the integrality.  Binary variables pass through unchanged: they
    are their own single bit.
    """
    variables = list(model.variables)
    new_constraints = []
    entries = {}
    next_vid = len(variables)

    for v in model.variables:
        if v.kind is VarKind.CONTINUOUS:
            continue
        if v.kind is VarKind.BINARY:
            entries[v.vid] = (Fraction(0), (v.vid,))
            continue
        if v.lower is None or v.upper is None:
            raise UnboundedInteger(v.name)
        lo, hi = _ceil(v.lower), _floor(v.upper)
        if lo > hi:
            raise EmptyIntegerRange(v.name)
        variables[v.vid] = replace(
            v, kind=VarKind.CONTINUOUS, lower=Fraction(lo), upper=Fraction(hi))
        if lo == hi:
            new_constraints.append(Constraint(
                body=Var(v.vid), lower=Fraction(lo), upper=Fraction(lo),
                origin=Origin.BINARIZATION))
            entries[v.vid] = (Fraction(lo), ())
            continue
        q = bit_count(hi - lo)
        bit_vids = []
        terms = []
        for i in range(q):
            b = Variable(
                vid=next_vid,
                name=f"{v.name}__b{i + 1}",
                kind=VarKind.INTEGER,
                lower=Fraction(0),
                upper=Fraction(1),
            )
            variables.append(b)
            bit_vids.append(next_vid)
            next_vid += 1
            if i == 0:
                terms.append(Var(b.vid))
            else:
                terms.append(Product((Const(Fraction(2 ** i)), Var(b.vid))))
        encoded = mksum([Const(Fraction(lo))] + terms) if lo != 0 else mksum(terms)
        new_constraints.append(Constraint(
            body=Sub(Var(v.vid), encoded),
            lower=Fraction(0), upper=Fraction(0),
            origin=Origin.BINARIZATION))
        entries[v.vid] = (Fraction(lo), tuple(bit_vids))

    out = replace(
        model,
        variables=tuple(variables),
        constraints=model.constraints + tuple(new_constraints),
    )
    return out, BinMap(entries)


def flatten_binarized(model: Model) -> Model:
    """Adds (b = 0) or (b = 1) for every 0/1 integer variable and drops all
    integrality kinds.  Requires a post-binarize model."""
    variables = list(model.variables)
    disjunctions = list(model.disjunctions)
    for v in model.variables:
        if v.kind is VarKind.CONTINUOUS:
            continue
        if v.lower != 0 or v.upper != 1:
            raise NotBinarized(v.name)
        disjunctions.append(Disjunction(
            options=(
                Constraint(Var(v.vid), Fraction(0), Fraction(0), Origin.FLATTENING),
                Constraint(Var(v.vid), Fraction(1), Fraction(1), Origin.FLATTENING),
            ),
            origin=Origin.FLATTENING,
        ))
        variables[v.vid] = replace(v, kind=VarKind.CONTINUOUS)
    return replace(model, variables=tuple(variables),
                   disjunctions=tuple(disjunctions))


def flatten_naive(model: Model, cap: int = NAIVE_FLATTEN_CAP) -> Model:
    """Static flattening without binarization: for each integer variable in
    [l, u] assert (x >= l) and (x <= i or x >= i+1) for every integer i in
    [l, u] and (x <= u).  Only viable for tiny ranges; kept mainly as a
    cross-check for the binarized form."""
    variables = list(model.variables)
    constraints = list(model.constraints)
    disjunctions = list(model.disjunctions)
    for v in model.variables:
        if v.kind is VarKind.CONTINUOUS:
            continue
        if v.lower is None or v.upper is None:
            raise UnboundedInteger(v.name)
        lo, hi = _ceil(v.lower), _floor(v.upper)
        if lo > hi:
            raise EmptyIntegerRange(v.name)
        if hi - lo > cap:
            raise RangeTooWide(hi - lo, cap)
        constraints.append(Constraint(
            Var(v.vid), Fraction(lo), None, Origin.FLATTENING))
        constraints.append(Constraint(
            Var(v.vid), None, Fraction(hi), Origin.FLATTENING))
        for i in range(lo, hi + 1):
            disjunctions.append(Disjunction(
                options=(
                    Constraint(Var(v.vid), None, Fraction(i), Origin.FLATTENING),
                    Constraint(Var(v.vid), Fraction(i + 1), None, Origin.FLATTENING),
                ),
                origin=Origin.FLATTENING,
            ))
        variables[v.vid] = replace(
            v, kind=VarKind.CONTINUOUS, lower=Fraction(lo), upper=Fraction(hi))
    return replace(model, variables=tuple(variables),
                   constraints=tuple(constraints),
                   disjunctions=tuple(disjunctions))
