"""Integrality management: disjunctive-cut repair loops around check-sat.

A fractional value v of an integer variable x is excluded by asserting
x <= floor(v) or x >= ceil(v).  The cut removes no integral point, so it
is asserted permanently (it survives the optimization layer's push/pop
probes).  OneByOne adds one cut per round, AllInOne cuts every violator
at once, Disabled passes the check straight through to the solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .errors import IntegerValue
from .model import Const, Model, Var, VarKind, violated_integrality
from .smt import Cmp, OrF, SatResult, SmtSession

DEFAULT_CUT_ROUND_FALLBACK = 100_000


class IntegralityMode(Enum):
    ONE_BY_ONE = "onebyone"
    ALL_IN_ONE = "allinone"
    DISABLED = "disabled"


@dataclass
class CutStats:
    cuts_added: int = 0
    repair_iterations: int = 0


def cut_for(vid: int, v: Fraction) -> OrF:
    """(x <= floor(v)) or (x >= ceil(v)) for a fractional value v."""
    if v.denominator == 1:
        raise IntegerValue(f"value {v} is already integral")
    fl = v.numerator // v.denominator
    return OrF((
        Cmp("<=", Var(vid), Const(Fraction(fl))),
        Cmp(">=", Var(vid), Const(Fraction(fl + 1))),
    ))


def default_max_cut_rounds(model: Model) -> int:
    """10x the theoretical cut bound sum(u - l) when all integer variables
    are bounded, else a flat fallback."""
    total = 0
    for v in model.variables:
        if v.kind is VarKind.CONTINUOUS:
            continue
        if v.lower is None or v.upper is None:
            return DEFAULT_CUT_ROUND_FALLBACK
        total += int(v.upper - v.lower) + 1
    return max(10 * total, 10)


def integral_check_sat(
    session: SmtSession,
    model: Model,
    mode: IntegralityMode,
    max_cut_rounds: int | None = None,
) -> tuple[SatResult, CutStats]:
    """check-sat wrapped in the cut-repair loop; any Sat returned has no
    integrality violations."""
    stats = CutStats()
    if mode is IntegralityMode.DISABLED:
        return session.check_sat(), stats

    if max_cut_rounds is None:
        max_cut_rounds = default_max_cut_rounds(model)

    for _ in range(max_cut_rounds + 1):
        res = session.check_sat()
        if not res.is_sat:
            return res, stats
        if res.unparseable or res.assignment is None:
            return SatResult(
                "unknown",
                reason="model values unparseable under cut mode",
            ), stats
        violations = violated_integrality(model, res.assignment)
        if not violations:
            return res, stats
        stats.repair_iterations += 1
        if mode is IntegralityMode.ONE_BY_ONE:
            violations = violations[:1]
        for vid, val in violations:
            session.assert_formula(cut_for(vid, val), permanent=True)
            stats.cuts_added += 1
    return SatResult(
        "unknown",
        reason=f"cut rounds exceeded ({max_cut_rounds})",
    ), stats
