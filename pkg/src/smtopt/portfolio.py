"""Feature vectors and the parallel racing portfolio.

A feature vector is one point in (preprocessing x integrality-management x
relaxation-method) space plus a solver configuration.  Workers are fully
isolated (own solver process, own derived model); the first worker to
return a definitive outcome (Optimal or Infeasible) wins and the rest are
cancelled.  Unknown never wins while anyone is still running.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .cropt import (
    Cancelled,
    FeasibilityDriver,
    OptOutcome,
    OptStatus,
    optimize_hybrid,
    optimize_naive,
    optimize_ubs,
)
from .errors import SmtOptError
from .integrality import CutStats, IntegralityMode
from .model import Model, ProblemClass, normalize_to_min
from .preprocess import binarize, flatten_binarized
from .smt import SmtSession, SolverConfig


class Preprocess(Enum):
    NOPRE = "nopre"
    BINARIZE = "bin"
    BINARIZED_FLATTEN = "bin_flattening"


class CrMethod(Enum):
    NAIVE = "naive"
    UBS = "ubs"
    HYBRID = "hybrid"


_PREFIXES = {
    (Preprocess.NOPRE, IntegralityMode.ALL_IN_ONE): "allinone",
    (Preprocess.NOPRE, IntegralityMode.ONE_BY_ONE): "onebyone",
    (Preprocess.NOPRE, IntegralityMode.DISABLED): "nobb",
    (Preprocess.BINARIZE, IntegralityMode.ALL_IN_ONE): "bin_allinone",
    (Preprocess.BINARIZE, IntegralityMode.ONE_BY_ONE): "bin_onebyone",
    (Preprocess.BINARIZED_FLATTEN, IntegralityMode.DISABLED): "bin_flattening",
}
_PREFIX_TO_COMBO = {v: k for k, v in _PREFIXES.items()}


class InvalidVector(SmtOptError):
    pass


@dataclass(frozen=True)
class FeatureVector:
    preprocess: Preprocess
    integrality: IntegralityMode
    cr: CrMethod
    solver: SolverConfig

    def __post_init__(self):
        if (self.preprocess, self.integrality) not in _PREFIXES:
            raise InvalidVector(
                f"invalid combination {self.preprocess.value}/"
                f"{self.integrality.value} (flattening requires disabled "
                "integrality management)")

    @property
    def name(self) -> str:
        return f"{_PREFIXES[(self.preprocess, self.integrality)]}_{self.cr.value}"


def parse_vector_name(name: str, solver: SolverConfig) -> FeatureVector:
    """Inverse of FeatureVector.name, e.g. 'bin_flattening_hybrid'."""
    prefix, _, cr_name = name.rpartition("_")
    try:
        cr = CrMethod(cr_name)
        pre, integ = _PREFIX_TO_COMBO[prefix]
    except (ValueError, KeyError):
        raise InvalidVector(f"unknown vector name {name!r}") from None
    return FeatureVector(pre, integ, cr, solver)


def default_vectors(pclass: ProblemClass, solver: SolverConfig) -> list:
    """The full portfolio: 18 vectors for problems with integrality
    constraints, 3 for integer-free classes."""
    if pclass in (ProblemClass.LP, ProblemClass.NLP):
        return [
            FeatureVector(Preprocess.NOPRE, IntegralityMode.DISABLED, cr, solver)
            for cr in CrMethod
        ]
    return [
        FeatureVector(pre, integ, cr, solver)
        for (pre, integ) in _PREFIXES
        for cr in CrMethod
    ]


@dataclass
class WorkerRecord:
    vector: str
    outcome: Optional[OptOutcome]
    wall_time: float = 0.0
    cut_stats: CutStats = field(default_factory=CutStats)
    probe_count: int = 0
    cancelled: bool = False


@dataclass
class PortfolioResult:
    winner: Optional[str]  # vector name
    outcome: OptOutcome
    per_worker: list  # list[WorkerRecord]


def _derive_model(model: Model, pre: Preprocess) -> Model:
    if pre is Preprocess.NOPRE:
        return model
    binarized, _ = binarize(model)
    if pre is Preprocess.BINARIZE:
        return binarized
    return flatten_binarized(binarized)


def run_worker(
    model: Model,
    vector: FeatureVector,
    eps: Fraction,
    deadline: Optional[float] = None,
    log_path: Optional[Path] = None,
    cancel_event: Optional[threading.Event] = None,
    session_box: Optional[list] = None,
) -> WorkerRecord:
    """One dataflow: preprocess -> open session -> optimize.  Every failure
    is captured in the record, never raised across workers."""
    record = WorkerRecord(vector=vector.name, outcome=None)
    start = time.monotonic()
    log_records: list = []
    hook = log_records.append

    try:
        work = normalize_to_min(model)
        derived = _derive_model(work, vector.preprocess)
        integer_sorts = (vector.integrality is IntegralityMode.DISABLED
                         and derived.has_integer_vars)
        session = SmtSession(vector.solver, derived, integer_sorts)
        if session_box is not None:
            session_box.append(session)
        try:
            drv = FeasibilityDriver(
                session, derived, vector.integrality,
                hook=hook, deadline=deadline,
                cancel_check=(cancel_event.is_set if cancel_event else None),
            )
            drv.define_objective()
            if vector.cr is CrMethod.NAIVE:
                outcome = optimize_naive(drv, eps)
            elif vector.cr is CrMethod.UBS:
                outcome = optimize_ubs(drv, eps)
            else:
                outcome = optimize_hybrid(drv, eps)
            record.cut_stats = drv.stats
            record.probe_count = drv.probe_count
        finally:
            session.close()
        if outcome.status is OptStatus.OPTIMAL and work.report_negated \
                and outcome.value is not None:
            outcome.value = -outcome.value
        record.outcome = outcome
    except Cancelled:
        record.cancelled = True
        record.outcome = OptOutcome(OptStatus.UNKNOWN, reason="cancelled")
    except TimeoutError:
        record.outcome = OptOutcome(OptStatus.UNKNOWN, reason="timeout")
    except SmtOptError as e:
        if cancel_event is not None and cancel_event.is_set():
            record.cancelled = True
            record.outcome = OptOutcome(OptStatus.UNKNOWN, reason="cancelled")
        elif deadline is not None and time.monotonic() >= deadline:
            record.outcome = OptOutcome(OptStatus.UNKNOWN, reason="timeout")
        else:
            record.outcome = OptOutcome(
                OptStatus.UNKNOWN,
                reason=f"{type(e).__name__}: {e}")
    record.wall_time = time.monotonic() - start

    if log_path is not None:
        _write_log(log_path, record, log_records)
    return record


def _write_log(path: Path, record: WorkerRecord, probe_records: list):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        for r in probe_records:
            f.write(json.dumps(r) + "\n")
        out = record.outcome
        f.write(json.dumps({
            "event": "outcome",
            "vector": record.vector,
            "status": out.status.value if out else "missing",
            "value": str(out.value) if out and out.value is not None else None,
            "reason": out.reason if out else "",
            "wall_time": record.wall_time,
            "cuts_added": record.cut_stats.cuts_added,
            "repair_iterations": record.cut_stats.repair_iterations,
            "probe_count": record.probe_count,
            "cancelled": record.cancelled,
        }) + "\n")


def _aggregate(records: list) -> PortfolioResult:
    for r in records:
        if r.outcome is not None and r.outcome.is_definitive:
            return PortfolioResult(r.vector, r.outcome, records)
    for r in records:
        if r.outcome is not None and r.outcome.status is OptStatus.BOUND_EXCEEDED:
            return PortfolioResult(None, r.outcome, records)
    reasons = "; ".join(
        f"{r.vector}: {r.outcome.reason if r.outcome else 'not run'}"
        for r in records)
    return PortfolioResult(
        None, OptOutcome(OptStatus.UNKNOWN, reason=reasons), records)


def run_portfolio(
    model: Model,
    vectors: list,
    eps: Fraction,
    timeout_s: Optional[float] = None,
    jobs: Optional[int] = None,
    seq: bool = False,
    cross_check: bool = False,
    log_dir: Optional[Path] = None,
    benchmark: str = "model",
) -> PortfolioResult:
    assert vectors, "need at least one feature vector"
    deadline = None if timeout_s is None else time.monotonic() + timeout_s

    def log_path(v: FeatureVector) -> Optional[Path]:
        if log_dir is None:
            return None
        return Path(log_dir) / benchmark / f"{v.name}.jsonl"

    if seq:
        records = []
        done = False
        for v in vectors:
            if done and not cross_check:
                rec = WorkerRecord(vector=v.name, outcome=OptOutcome(
                    OptStatus.UNKNOWN, reason="cancelled"), cancelled=True)
                if log_dir is not None:
                    _write_log(log_path(v), rec, [])
                records.append(rec)
                continue
            rec = run_worker(model, v, eps, deadline=deadline,
                             log_path=log_path(v))
            records.append(rec)
            if rec.outcome is not None and rec.outcome.is_definitive:
                done = True
        return _aggregate(records)

    # Parallel mode: one thread per worker, bounded by a semaphore.
    jobs = jobs or len(vectors)
    gate = threading.Semaphore(max(1, jobs))
    cancel = threading.Event()
    boxes = {v.name: [] for v in vectors}
    results: dict = {}
    order: list = []
    lock = threading.Lock()
    first_definitive = threading.Event()

    def work(v: FeatureVector):
        with gate:
            if cancel.is_set() and not cross_check:
                rec = WorkerRecord(vector=v.name, outcome=OptOutcome(
                    OptStatus.UNKNOWN, reason="cancelled"), cancelled=True)
            else:
                rec = run_worker(
                    model, v, eps, deadline=deadline, log_path=log_path(v),
                    cancel_event=None if cross_check else cancel,
                    session_box=boxes[v.name])
            with lock:
                results[v.name] = rec
                order.append(rec)
            if rec.outcome is not None and rec.outcome.is_definitive \
                    and not cross_check:
                cancel.set()
                for name, box in boxes.items():
                    if name != v.name:
                        for s in box:
                            s.kill()
                first_definitive.set()

    threads = [threading.Thread(target=work, args=(v,), daemon=True)
               for v in vectors]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    # completion order decides the winner; ties are impossible under lock
    return _aggregate(order)
