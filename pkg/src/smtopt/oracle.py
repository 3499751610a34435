"""Brute-force reference solver for desk-scale verification.

Enumerates every integer combination and scans continuous variables on a
rational grid.  Deliberately shares nothing with the main pipeline beyond
the core model types, so it can serve as an independent oracle.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .cropt import Bracket, OptOutcome, OptStatus
from .errors import TooLarge, UnboundedVariable
from .model import (
    Model,
    Sense,
    VarKind,
    check_feasible_point,
    normalize_to_min,
    objective_value,
)

MAX_INTEGER_COMBINATIONS = 10 ** 6
MAX_CONTINUOUS_DIMS = 2
MAX_GRID_STEPS = 10 ** 4


def brute_force(
    model: Model,
    grid: Fraction,
    lipschitz: Fraction = Fraction(0),
) -> OptOutcome:
    """Minimum objective over all feasible grid points.

    Constraint feasibility at grid points uses tolerance grid * lipschitz,
    which bounds (not hides) the discretization error; integrality is
    exact.  The returned outcome's bracket records that slack.
    """
    assert grid > 0
    work = normalize_to_min(model)

    int_axes = []
    cont_axes = []
    combos = 1
    for v in work.variables:
        if v.lower is None or v.upper is None:
            raise UnboundedVariable(f"{v.name} must be finitely bounded")
        if v.kind is VarKind.CONTINUOUS:
            steps = (v.upper - v.lower) / grid
            if steps > MAX_GRID_STEPS:
                raise TooLarge(f"{v.name}: {steps} grid steps exceeds cap")
            n = int(steps) + 1
            axis = [v.lower + grid * i for i in range(n)]
            if axis[-1] < v.upper:
                axis.append(v.upper)
            cont_axes.append((v.vid, axis))
        else:
            lo = -((-v.lower.numerator) // v.lower.denominator)
            hi = v.upper.numerator // v.upper.denominator
            if lo > hi:
                return OptOutcome(OptStatus.INFEASIBLE)
            combos *= hi - lo + 1
            if combos > MAX_INTEGER_COMBINATIONS:
                raise TooLarge("integer range product exceeds cap")
            int_axes.append((v.vid, [Fraction(k) for k in range(lo, hi + 1)]))
    if len(cont_axes) > MAX_CONTINUOUS_DIMS:
        raise TooLarge(f"{len(cont_axes)} continuous dimensions exceeds cap")

    tol = grid * lipschitz
    axes = int_axes + cont_axes
    vids = [vid for vid, _ in axes]
    best_val = None
    best_point = None
    for point in itertools.product(*(axis for _, axis in axes)):
        a = dict(zip(vids, point))
        if not check_feasible_point(work, a, tol):
            continue
        val = objective_value(work, a)
        if best_val is None or val < best_val:
            best_val, best_point = val, a

    if best_val is None:
        return OptOutcome(OptStatus.INFEASIBLE)
    if model.objective.sense is Sense.MAXIMIZE:
        best_val = -best_val
    return OptOutcome(
        OptStatus.OPTIMAL, value=best_val, witness=best_point,
        bracket=Bracket(best_val - tol, best_val))
