"""Continuous relaxation optimization: drive feasibility probes on the
objective down to an epsilon-accurate minimum.

Three methods: naive descent (tighten the objective below each value
found), unbounded binary search (exponential bracketing then bisection),
and the hybrid (bisection with an emptiness probe after every new upper
bound, which can terminate as soon as nothing more than epsilon better
exists).

The accuracy guarantee is ABSOLUTE: any Optimal outcome's value is within
epsilon above the true minimum.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional

from .integrality import CutStats, IntegralityMode, integral_check_sat
from .model import Model
from .smt import SatResult, SmtSession

OBJ_SYMBOL = "obj"
DEFAULT_DOUBLING_CAP = 64
DEFAULT_NAIVE_MAX_ITERS = 1_000_000


class OptStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNKNOWN = "unknown"
    BOUND_EXCEEDED = "bound_exceeded"


@dataclass(frozen=True)
class Bracket:
    lo: Optional[Fraction]  # None = nothing proven below (-inf)
    hi: Optional[Fraction]  # witnessed feasible objective value


@dataclass
class OptOutcome:
    status: OptStatus
    value: Optional[Fraction] = None
    witness: Optional[dict] = None  # vid -> Fraction
    bracket: Optional[Bracket] = None
    reason: str = ""
    direction: str = ""  # for BOUND_EXCEEDED: "below"

    @property
    def is_definitive(self) -> bool:
        return self.status in (OptStatus.OPTIMAL, OptStatus.INFEASIBLE)


class Cancelled(Exception):
    """Raised inside the driver when the portfolio revoked this worker."""


class FeasibilityDriver:
    """Binds one session to an integrality mode, a deadline/cancel check and
    an instrumentation hook.  The optimization methods only ever see
    integral Sat results."""

    def __init__(
        self,
        session: SmtSession,
        model: Model,
        mode: IntegralityMode,
        hook: Optional[Callable[[dict], None]] = None,
        deadline: Optional[float] = None,
        cancel_check: Optional[Callable[[], bool]] = None,
        max_cut_rounds: Optional[int] = None,
    ):
        self.session = session
        self.model = model
        self.mode = mode
        self.hook = hook or (lambda record: None)
        self.deadline = deadline
        self.cancel_check = cancel_check
        self.max_cut_rounds = max_cut_rounds
        self.stats = CutStats()
        self.probe_count = 0

    def define_objective(self):
        """Fresh variable obj, permanently tied to the objective body."""
        em = self.session.emitter
        body = em.emit(self.model.objective.body)
        k = self.model.objective.constant
        if k != 0:
            from .smt import emit_rat
            body = f"(+ {body} {emit_rat(k)})"
        self.session.declare_real(OBJ_SYMBOL)
        self.session.assert_text(f"(= {OBJ_SYMBOL} {body})", permanent=True)

    def check(self, phase: str, bound: Optional[Fraction]) -> SatResult:
        if self.cancel_check is not None and self.cancel_check():
            raise Cancelled()
        if self.deadline is not None and time.monotonic() >= self.deadline:
            raise TimeoutError("worker deadline exceeded")
        start = time.monotonic()
        res, stats = integral_check_sat(
            self.session, self.model, self.mode, self.max_cut_rounds)
        self.stats.cuts_added += stats.cuts_added
        self.stats.repair_iterations += stats.repair_iterations
        self.probe_count += 1
        self.hook({
            "event": "probe",
            "phase": phase,
            "bound": None if bound is None else str(bound),
            "verdict": res.status,
            "elapsed": time.monotonic() - start,
            "cuts": stats.cuts_added,
        })
        return res

    def probe_leq(self, phase: str, bound: Fraction) -> SatResult:
        """Retractable probe: push; assert obj <= bound; check; pop."""
        from .smt import emit_rat
        self.session.push()
        try:
            self.session.assert_text(f"(<= {OBJ_SYMBOL} {emit_rat(bound)})")
            return self.check(phase, bound)
        finally:
            self.session.pop()

    def tighten_leq(self, bound: Fraction):
        """Permanent monotone tightening (naive method)."""
        from .smt import emit_rat
        self.session.assert_text(
            f"(<= {OBJ_SYMBOL} {emit_rat(bound)})", permanent=True)

    def bracket_note(self, lo: Optional[Fraction], hi: Optional[Fraction]):
        self.hook({
            "event": "bracket",
            "lo": None if lo is None else str(lo),
            "hi": None if hi is None else str(hi),
        })


def _obj_value(res: SatResult) -> Optional[Fraction]:
    return res.values.get(OBJ_SYMBOL)


def optimize_naive(
    drv: FeasibilityDriver,
    eps: Fraction,
    max_iters: int = DEFAULT_NAIVE_MAX_ITERS,
) -> OptOutcome:
    assert eps > 0
    best_value: Optional[Fraction] = None
    best_witness = None
    for _ in range(max_iters):
        res = drv.check("naive", best_value)
        if res.is_unsat:
            if best_value is None:
                return OptOutcome(OptStatus.INFEASIBLE)
            return OptOutcome(
                OptStatus.OPTIMAL, value=best_value, witness=best_witness,
                bracket=Bracket(best_value - eps, best_value))
        if res.is_unknown:
            return OptOutcome(
                OptStatus.UNKNOWN, value=best_value, witness=best_witness,
                reason=res.reason or "solver returned unknown")
        v = _obj_value(res)
        if v is None:
            return OptOutcome(
                OptStatus.UNKNOWN, value=best_value, witness=best_witness,
                reason="naive requires model values")
        best_value, best_witness = v, res.assignment
        drv.bracket_note(None, best_value)
        drv.tighten_leq(v - eps)
    return OptOutcome(
        OptStatus.UNKNOWN, value=best_value, witness=best_witness,
        reason=f"iterations exceeded ({max_iters})")


def _empty_probe(drv, eps, hi, witness):
    """Hybrid's naive step: is anything more than eps below hi feasible?
    Returns (outcome_or_None, hi, witness)."""
    res = drv.probe_leq("empty", hi - eps)
    if res.is_unsat:
        out = OptOutcome(
            OptStatus.OPTIMAL, value=hi, witness=witness,
            bracket=Bracket(hi - eps, hi))
        return out, hi, witness
    if res.is_unknown:
        out = OptOutcome(
            OptStatus.UNKNOWN, value=hi, witness=witness,
            reason=res.reason or "solver returned unknown")
        return out, hi, witness
    v = _obj_value(res)
    if v is not None:
        hi, witness = v, res.assignment
    else:
        hi = hi - eps  # sat implies f* <= hi - eps even without a value
    return None, hi, witness


def _optimize_bisection(
    drv: FeasibilityDriver,
    eps: Fraction,
    doubling_cap: int,
    hybrid: bool,
) -> OptOutcome:
    assert eps > 0

    # Phase 1a: first feasible value.
    res = drv.check("initial", None)
    if res.is_unsat:
        return OptOutcome(OptStatus.INFEASIBLE)
    if res.is_unknown:
        return OptOutcome(OptStatus.UNKNOWN,
                          reason=res.reason or "solver returned unknown")
    hi = _obj_value(res)
    if hi is None:
        return OptOutcome(OptStatus.UNKNOWN,
                          reason="bounds search requires an initial value")
    witness = res.assignment
    drv.bracket_note(None, hi)
    if hybrid:
        out, hi, witness = _empty_probe(drv, eps, hi, witness)
        if out is not None:
            return out
        drv.bracket_note(None, hi)

    # Phase 1b: exponential bracketing for a proven lower bound.
    lo: Optional[Fraction] = None
    delta = max(eps, Fraction(1))
    for _ in range(doubling_cap):
        probe = hi - delta
        res = drv.probe_leq("bounds", probe)
        if res.is_unsat:
            lo = probe
            break
        if res.is_unknown:
            return OptOutcome(
                OptStatus.UNKNOWN, value=hi, witness=witness,
                bracket=Bracket(None, hi),
                reason=res.reason or "solver returned unknown")
        v = _obj_value(res)
        if v is not None:
            hi, witness = v, res.assignment
        else:
            hi = probe
        delta *= 2
        drv.bracket_note(None, hi)
        if hybrid:
            out, hi, witness = _empty_probe(drv, eps, hi, witness)
            if out is not None:
                return out
            drv.bracket_note(None, hi)
    if lo is None:
        return OptOutcome(
            OptStatus.BOUND_EXCEEDED, value=hi, witness=witness,
            bracket=Bracket(None, hi), direction="below",
            reason=f"no lower bound after {doubling_cap} doubling probes")
    drv.bracket_note(lo, hi)

    # Phase 2: bisection.
    while hi - lo > eps:
        mid = (lo + hi) / 2
        res = drv.probe_leq("bisect", mid)
        if res.is_unsat:
            lo = mid
        elif res.is_unknown:
            return OptOutcome(
                OptStatus.UNKNOWN, value=hi, witness=witness,
                bracket=Bracket(lo, hi),
                reason=res.reason or "solver returned unknown")
        else:
            v = _obj_value(res)
            if v is not None:
                hi, witness = v, res.assignment
            else:
                hi = mid
            if hybrid:
                out, hi, witness = _empty_probe(drv, eps, hi, witness)
                if out is not None:
                    return out
        drv.bracket_note(lo, hi)
    return OptOutcome(OptStatus.OPTIMAL, value=hi, witness=witness,
                      bracket=Bracket(lo, hi))


def optimize_ubs(
    drv: FeasibilityDriver,
    eps: Fraction,
    doubling_cap: int = DEFAULT_DOUBLING_CAP,
) -> OptOutcome:
    return _optimize_bisection(drv, eps, doubling_cap, hybrid=False)


def optimize_hybrid(
    drv: FeasibilityDriver,
    eps: Fraction,
    doubling_cap: int = DEFAULT_DOUBLING_CAP,
) -> OptOutcome:
    return _optimize_bisection(drv, eps, doubling_cap, hybrid=True)
