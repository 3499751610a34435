"""Shared test fixtures: hand-built instances with analytic optima, a
seeded random instance generator, and a driver harness for running one
optimization method directly with instrumentation."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from smtopt.cropt import (
    FeasibilityDriver,
    OptOutcome,
    optimize_hybrid,
    optimize_naive,
    optimize_ubs,
)
from smtopt.integrality import IntegralityMode
from smtopt.model import (
    Const,
    Constraint,
    Model,
    Neg,
    Objective,
    Pow,
    Product,
    Sense,
    Sub,
    Sum,
    Var,
    VarKind,
    Variable,
    mksum,
    normalize_to_min,
)
from smtopt.smt import SmtSession, SolverConfig

F = Fraction
EPS = F(1, 1000)


def cvar(vid, name, lo, hi):
    return Variable(vid, name, VarKind.CONTINUOUS,
                    None if lo is None else F(lo),
                    None if hi is None else F(hi))


def ivar(vid, name, lo, hi):
    return Variable(vid, name, VarKind.INTEGER,
                    None if lo is None else F(lo),
                    None if hi is None else F(hi))


def bvar(vid, name):
    return Variable(vid, name, VarKind.BINARY, F(0), F(1))


def lin(*pairs):
    """Linear body from (coef, vid) pairs."""
    terms = []
    for coef, vid in pairs:
        coef = F(coef)
        if coef == 0:
            continue
        terms.append(Var(vid) if coef == 1 else Product((Const(coef), Var(vid))))
    return mksum(terms)


def sq(vid):
    return Pow(Var(vid), Const(F(2)))


@dataclass(frozen=True)
class Instance:
    name: str
    model: Model
    optimum: Optional[Fraction]  # user-sense optimal value; None = infeasible

    @property
    def internal_optimum(self) -> Optional[Fraction]:
        """Optimum of the minimized form used inside the engine."""
        if self.optimum is None:
            return None
        if self.model.objective.sense is Sense.MAXIMIZE:
            return -self.optimum
        return self.optimum


def known_optimum_suite():
    """Hand-built instances with analytically derived optima, spanning
    LP/NLP/ILP/MILP/MINLP plus binary classes, a wide-range integer
    instance, a pooling-style bilinear NLP, and one infeasible case."""
    out = []

    # LP: minimize x, 0 <= x <= 10, x >= 3  ->  3
    out.append(Instance("lp_shift", Model(
        (cvar(0, "x", 0, 10),),
        (Constraint(Var(0), F(3), None),),
        Objective(Sense.MINIMIZE, Var(0))), F(3)))

    # LP: minimize x + y on the unit box with x + y >= 3/2  ->  3/2
    out.append(Instance("lp_box", Model(
        (cvar(0, "x", 0, 1), cvar(1, "y", 0, 1)),
        (Constraint(lin((1, 0), (1, 1)), F(3, 2), None),),
        Objective(Sense.MINIMIZE, lin((1, 0), (1, 1)))), F(3, 2)))

    # LP maximize: max x + 1, 0 <= x <= 5  ->  6 (negation undone at output)
    out.append(Instance("lp_max", Model(
        (cvar(0, "x", 0, 5),),
        (Constraint(Var(0), F(0), None),),
        Objective(Sense.MAXIMIZE, Var(0), constant=F(1))), F(6)))

    # LP with an equality row: min x + 2y, x + y = 3, x,y in [0,3]  ->  3
    out.append(Instance("lp_eq", Model(
        (cvar(0, "x", 0, 3), cvar(1, "y", 0, 3)),
        (Constraint(lin((1, 0), (1, 1)), F(3), F(3)),),
        Objective(Sense.MINIMIZE, lin((1, 0), (2, 1)))), F(3)))

    # NLP: min x^2, -3 <= x <= 3, x >= 3/2  ->  9/4
    out.append(Instance("nlp_square", Model(
        (cvar(0, "x", -3, 3),),
        (Constraint(Var(0), F(3, 2), None),),
        Objective(Sense.MINIMIZE, sq(0))), F(9, 4)))

    # NLP, pooling-style bilinear blend: min x*y with the blending demand
    # x + y >= 2 on the box [1/2, 2]^2  ->  3/4 at (1/2, 3/2)
    out.append(Instance("nlp_pool_bilinear", Model(
        (cvar(0, "x", F(1, 2), 2), cvar(1, "y", F(1, 2), 2)),
        (Constraint(lin((1, 0), (1, 1)), F(2), None),),
        Objective(Sense.MINIMIZE, Product((Var(0), Var(1))))), F(3, 4)))

    # NLP: min x + y with x*y >= 4, x in [1,4], y in [1,8]  ->  4 at (2,2)
    out.append(Instance("nlp_amgm", Model(
        (cvar(0, "x", 1, 4), cvar(1, "y", 1, 8)),
        (Constraint(Product((Var(0), Var(1))), F(4), None),),
        Objective(Sense.MINIMIZE, lin((1, 0), (1, 1)))), F(4)))

    # ILP: min x, x integer in [0,10], x >= 5/2  ->  3
    out.append(Instance("ilp_ceil", Model(
        (ivar(0, "x", 0, 10),),
        (Constraint(Var(0), F(5, 2), None),),
        Objective(Sense.MINIMIZE, Var(0))), F(3)))

    # ILP maximize: max 3x + 2y, x,y integer in [0,5], x + y <= 4  ->  12
    out.append(Instance("ilp_max", Model(
        (ivar(0, "x", 0, 5), ivar(1, "y", 0, 5)),
        (Constraint(lin((1, 0), (1, 1)), None, F(4)),),
        Objective(Sense.MAXIMIZE, lin((3, 0), (2, 1)))), F(12)))

    # MILP: min x + y, x integer in [0,2], y in [0,1], x + y >= 3/2  ->  3/2
    out.append(Instance("milp_mix", Model(
        (ivar(0, "x", 0, 2), cvar(1, "y", 0, 1)),
        (Constraint(lin((1, 0), (1, 1)), F(3, 2), None),),
        Objective(Sense.MINIMIZE, lin((1, 0), (1, 1)))), F(3, 2)))

    # MILP maximize: max 2x + 3y, x in [0,4], y integer in [0,3],
    # 2x + y <= 6  ->  12 at (3/2, 3)
    out.append(Instance("milp_max", Model(
        (cvar(0, "x", 0, 4), ivar(1, "y", 0, 3)),
        (Constraint(lin((2, 0), (1, 1)), None, F(6)),),
        Objective(Sense.MAXIMIZE, lin((2, 0), (3, 1)))), F(12)))

    # MINLP: min x^2 + y, x integer in [-3,3] with x >= 3/2, y in [1/4,1]
    # -> 4 + 1/4
    out.append(Instance("minlp_square", Model(
        (ivar(0, "x", -3, 3), cvar(1, "y", F(1, 4), 1)),
        (Constraint(Var(0), F(3, 2), None),),
        Objective(Sense.MINIMIZE, Sum((sq(0), Var(1))))), F(17, 4)))

    # INLP: min x^2 - 5x, x integer in [0,5]  ->  -6 at x in {2,3}
    out.append(Instance("inlp_quad", Model(
        (ivar(0, "x", 0, 5),),
        (Constraint(Var(0), F(0), None),),
        Objective(Sense.MINIMIZE, Sub(sq(0), lin((5, 0))))), F(-6)))

    # BNLP: min (b1 + b2 - 1)^2 + b1, binary  ->  0 at (0,1)
    out.append(Instance("bnlp_parity", Model(
        (bvar(0, "b1"), bvar(1, "b2")),
        (Constraint(lin((1, 0), (1, 1)), F(0), None),),
        Objective(Sense.MINIMIZE, Sum((
            Pow(Sub(lin((1, 0), (1, 1)), Const(F(1))), Const(F(2))),
            Var(0))))), F(0)))

    # MBNLP: min b*(c+1) + (1-b)*((c-1)^2 + 1/2), b binary, c in [0,2]
    # b=1 gives c+1 >= 1; b=0 gives (c-1)^2 + 1/2 >= 1/2  ->  1/2
    c_minus_1_sq = Pow(Sub(Var(1), Const(F(1))), Const(F(2)))
    out.append(Instance("mbnlp_switch", Model(
        (bvar(0, "b"), cvar(1, "c", 0, 2)),
        (Constraint(Var(1), F(0), None),),
        Objective(Sense.MINIMIZE, Sum((
            Product((Var(0), Sum((Var(1), Const(F(1)))))),
            Product((Sub(Const(F(1)), Var(0)),
                     Sum((c_minus_1_sq, Const(F(1, 2)))))))))), F(1, 2)))

    # Wide integer range (the 20001-value binarization range):
    # min x, x integer in [-10000, 10000], x >= 19999/2  ->  10000
    out.append(Instance("ilp_wide_range", Model(
        (ivar(0, "x", -10000, 10000),),
        (Constraint(Var(0), F(19999, 2), None),),
        Objective(Sense.MINIMIZE, Var(0))), F(10000)))

    # MINLP, bilinear with integrality: min x*y, x integer in [1,3],
    # y in [1,2], x*y >= 5/2  ->  5/2 at (2, 5/4) or (3, 5/6)
    out.append(Instance("minlp_bilinear", Model(
        (ivar(0, "x", 1, 3), cvar(1, "y", 1, 2)),
        (Constraint(Product((Var(0), Var(1))), F(5, 2), None),),
        Objective(Sense.MINIMIZE, Product((Var(0), Var(1))))), F(5, 2)))

    # Infeasible: x in [0,1] with x >= 2
    out.append(Instance("infeasible_box", Model(
        (cvar(0, "x", 0, 1),),
        (Constraint(Var(0), F(2), None),),
        Objective(Sense.MINIMIZE, Var(0))), None))

    return out


def random_minlp(seed: int) -> Model:
    """Seeded tiny MINLP: <= 3 integer variables with range widths <= 8,
    at most 1 continuous variable appearing only linearly with small
    integer coefficients, polynomial degree <= 2.  Constructed so the
    brute-force oracle on a 1/6 grid is exact (every candidate optimum
    has denominator dividing 6)."""
    rng = random.Random(seed)
    variables = []
    n_int = rng.randint(1, 3)
    for i in range(n_int):
        lo = rng.randint(-4, 2)
        variables.append(ivar(i, f"i{i}", lo, lo + rng.randint(1, 8)))
    int_vids = list(range(n_int))
    cont_vid = None
    if rng.random() < 0.7:
        cont_vid = n_int
        lo = rng.randint(-3, 0)
        variables.append(cvar(cont_vid, "c0", lo, lo + rng.randint(1, 6)))

    def body(allow_quad: bool):
        terms = []
        for vid in int_vids:
            if rng.random() < 0.7:
                terms.append((rng.choice([-3, -2, -1, 1, 2, 3]), vid))
        if cont_vid is not None and rng.random() < 0.7:
            terms.append((rng.choice([-3, -2, -1, 1, 2, 3]), cont_vid))
        expr_terms = [] if not terms else [lin(*terms)]
        if allow_quad and rng.random() < 0.5:
            a, b = rng.choice(int_vids), rng.choice(int_vids)
            coef = rng.choice([-2, -1, 1, 2])
            core = sq(a) if a == b else Product((Var(a), Var(b)))
            expr_terms.append(core if coef == 1
                              else Product((Const(F(coef)), core)))
        return mksum(expr_terms) if expr_terms else None

    constraints = []
    for _ in range(rng.randint(1, 3)):
        b = body(allow_quad=True)
        if b is None:
            continue
        rhs = F(rng.randint(-8, 8))
        if rng.random() < 0.5:
            constraints.append(Constraint(b, None, rhs))
        else:
            constraints.append(Constraint(b, rhs, None))
    if not constraints:
        constraints.append(Constraint(Var(0), F(variables[0].lower), None))

    obj = body(allow_quad=True)
    if obj is None:
        obj = Var(rng.choice(int_vids))
    sense = Sense.MAXIMIZE if rng.random() < 0.4 else Sense.MINIMIZE
    return Model(tuple(variables), tuple(constraints),
                 Objective(sense, obj))


METHODS = {
    "naive": optimize_naive,
    "ubs": optimize_ubs,
    "hybrid": optimize_hybrid,
}


def run_method(
    model: Model,
    solver: SolverConfig,
    method: str = "ubs",
    mode: IntegralityMode = None,
    integer_sorts: bool = None,
    eps: Fraction = EPS,
    hook=None,
    **method_kwargs,
):
    """Run one CR method on one session directly (no portfolio), returning
    (outcome in user sense, driver).  Defaults: cut repair via AllInOne
    when the model has integrality kinds, otherwise Int-sort-free."""
    work = normalize_to_min(model)
    if mode is None:
        mode = (IntegralityMode.ALL_IN_ONE if work.has_integer_vars
                else IntegralityMode.DISABLED)
    if integer_sorts is None:
        integer_sorts = (mode is IntegralityMode.DISABLED
                         and work.has_integer_vars)
    session = SmtSession(solver, work, integer_sorts)
    try:
        drv = FeasibilityDriver(session, work, mode, hook=hook)
        drv.define_objective()
        outcome: OptOutcome = METHODS[method](drv, eps, **method_kwargs)
    finally:
        session.close()
    if work.report_negated and outcome.value is not None:
        outcome.value = -outcome.value
    return outcome, drv


def assert_eps_optimal(instance: Instance, value: Fraction, eps=EPS):
    """value must sit on the guaranteed side of the analytic optimum."""
    f = instance.optimum
    assert f is not None, f"{instance.name}: instance is infeasible"
    gap = value - f
    if instance.model.objective.sense is Sense.MAXIMIZE:
        assert -eps <= gap <= 0, \
            f"{instance.name}: reported {value}, optimum {f} (max)"
    else:
        assert 0 <= gap <= eps, \
            f"{instance.name}: reported {value}, optimum {f} (min)"
