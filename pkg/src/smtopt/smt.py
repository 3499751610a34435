"""Incremental SMT-LIB 2.0 conversation with an external solver process.

One solver process per session; the session is confined to one worker.
Responses are read through a background reader thread so that blocked
checks can be timed out and the process killed.
"""

from __future__ import annotations

import queue
import re
import subprocess
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .errors import (
    ExponentTooLarge,
    HandshakeFailure,
    NonIntegerExponent,
    PopOnEmptyStack,
    ProtocolError,
    SolverDied,
    SpawnFailure,
)
from .model import (
    Const,
    Div,
    Exp,
    Expr,
    Model,
    Neg,
    Pow,
    Product,
    Sub,
    Sum,
    Var,
    VarKind,
)

DEFAULT_POWER_UNROLL_CAP = 32


@dataclass(frozen=True)
class SolverConfig:
    command: str
    args: tuple = ()
    logic: Optional[str] = None  # None = auto
    per_check_timeout_ms: Optional[int] = None
    use_native_power: bool = False
    power_unroll_cap: int = DEFAULT_POWER_UNROLL_CAP

    def __post_init__(self):
        assert self.command, "solver command must be non-empty"


# --- formulas over expression comparisons ---

@dataclass(frozen=True)
class Cmp:
    op: str  # one of <=, >=, <, >, =
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class OrF:
    parts: tuple


@dataclass(frozen=True)
class AndF:
    parts: tuple


Formula = Union[Cmp, OrF, AndF]


@dataclass
class SatResult:
    status: str  # "sat" | "unsat" | "unknown"
    assignment: Optional[dict] = None  # vid -> Fraction (only when parseable)
    values: dict = field(default_factory=dict)  # symbol name -> Fraction
    unparseable: bool = False
    reason: str = ""

    @property
    def is_sat(self) -> bool:
        return self.status == "sat"

    @property
    def is_unsat(self) -> bool:
        return self.status == "unsat"

    @property
    def is_unknown(self) -> bool:
        return self.status == "unknown"


def emit_rat(r: Fraction) -> str:
    if r < 0:
        return f"(- {emit_rat(-r)})"
    if r.denominator == 1:
        return str(r.numerator)
    return f"(/ {r.numerator} {r.denominator})"


def emit_int(n: int) -> str:
    return f"(- {-n})" if n < 0 else str(n)


class ExprEmitter:
    """Deterministic prefix-form rendering of expression trees."""

    def __init__(self, names: dict, use_native_power: bool = False,
                 power_unroll_cap: int = DEFAULT_POWER_UNROLL_CAP):
        self.names = names  # vid -> SMT symbol
        self.use_native_power = use_native_power
        self.power_unroll_cap = power_unroll_cap

    def emit(self, e: Expr) -> str:
        if isinstance(e, Const):
            return emit_rat(e.value)
        if isinstance(e, Var):
            return self.names[e.vid]
        if isinstance(e, Sum):
            return "(+ " + " ".join(self.emit(c) for c in e.children) + ")"
        if isinstance(e, Neg):
            return f"(- {self.emit(e.child)})"
        if isinstance(e, Product):
            return "(* " + " ".join(self.emit(c) for c in e.children) + ")"
        if isinstance(e, Sub):
            return f"(- {self.emit(e.a)} {self.emit(e.b)})"
        if isinstance(e, Div):
            return f"(/ {self.emit(e.a)} {self.emit(e.b)})"
        if isinstance(e, Pow):
            return self._emit_pow(e)
        if isinstance(e, Exp):
            return f"(exp {self.emit(e.child)})"
        raise TypeError(f"not an expression: {e!r}")

    def _emit_pow(self, e: Pow) -> str:
        base = self.emit(e.base)
        if self.use_native_power:
            return f"(^ {base} {self.emit(e.exponent)})"
        if not isinstance(e.exponent, Const) or e.exponent.value.denominator != 1 \
                or e.exponent.value < 0:
            raise NonIntegerExponent(
                f"cannot unroll exponent {e.exponent!r}; "
                "enable use_native_power for this solver")
        k = int(e.exponent.value)
        if k > self.power_unroll_cap:
            raise ExponentTooLarge(k, self.power_unroll_cap)
        if k == 0:
            return "1"
        if k == 1:
            return base
        return "(* " + " ".join([base] * k) + ")"

    def emit_formula(self, f: Formula) -> str:
        if isinstance(f, Cmp):
            return f"({f.op} {self.emit(f.lhs)} {self.emit(f.rhs)})"
        if isinstance(f, OrF):
            return "(or " + " ".join(self.emit_formula(p) for p in f.parts) + ")"
        if isinstance(f, AndF):
            return "(and " + " ".join(self.emit_formula(p) for p in f.parts) + ")"
        raise TypeError(f"not a formula: {f!r}")


# --- value parsing ---

_INT_RE = re.compile(r"^-?\d+$")
_DEC_RE = re.compile(r"^-?\d+\.\d*$")


def tokenize_sexpr(text: str):
    return re.findall(r"\(|\)|[^\s()]+", text)


def parse_sexpr(tokens, pos=0):
    """Parse one s-expression from a token list; returns (node, next_pos)."""
    if pos >= len(tokens):
        raise ProtocolError("unexpected end of solver output")
    t = tokens[pos]
    if t == "(":
        out = []
        pos += 1
        while pos < len(tokens) and tokens[pos] != ")":
            node, pos = parse_sexpr(tokens, pos)
            out.append(node)
        if pos >= len(tokens):
            raise ProtocolError("unbalanced solver output")
        return out, pos + 1
    if t == ")":
        raise ProtocolError("unexpected ')'")
    return t, pos + 1


def parse_value(node) -> Optional[Fraction]:
    """Exact rational from a model-value s-expression, or None when the
    value is not rational (e.g. algebraic numbers from NRA solvers)."""
    if isinstance(node, str):
        if _INT_RE.match(node):
            return Fraction(int(node))
        if _DEC_RE.match(node):
            return Fraction(node)
        return None
    if not node:
        return None
    head = node[0]
    if head == "-" and len(node) == 2:
        v = parse_value(node[1])
        return None if v is None else -v
    if head == "/" and len(node) == 3:
        p, q = parse_value(node[1]), parse_value(node[2])
        if p is None or q is None or q == 0:
            return None
        return p / q
    if head == "to_real" and len(node) == 2:
        return parse_value(node[1])
    return None


class SmtSession:
    """A live conversation with one external SMT-LIB 2.0 solver process."""

    GRACE_S = 2.0

    def __init__(self, config: SolverConfig, model: Model, integer_sorts: bool):
        self.config = config
        self.model = model
        self.integer_sorts = integer_sorts
        self.depth = 0
        self._closed = False
        # vid -> SMT symbol; engine symbols are v0, v1, ... so that arbitrary
        # input names never collide with SMT-LIB syntax.
        self.names = {v.vid: f"v{v.vid}" for v in model.variables}
        self.extra_symbols: list = []  # e.g. the objective variable
        # Permanent assertions that must survive pops issued above them:
        # list of [depth_asserted, text].
        self._permanent: list = []
        self.emitter = ExprEmitter(
            self.names,
            use_native_power=config.use_native_power,
            power_unroll_cap=config.power_unroll_cap,
        )

        cmd = [config.command, *config.args]
        try:
            self.proc = subprocess.Popen(
                cmd,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                bufsize=1,
            )
        except OSError as e:
            raise SpawnFailure(f"cannot start solver {cmd}: {e}") from e

        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

        try:
            self._handshake()
        except SolverDied as e:
            raise HandshakeFailure(str(e)) from e

    # --- plumbing ---

    def _read_loop(self):
        try:
            for line in self.proc.stdout:
                self._lines.put(line.rstrip("\n"))
        except ValueError:
            pass
        self._lines.put(None)  # EOF marker

    def _send(self, text: str):
        if self._closed or self.proc.poll() is not None:
            raise SolverDied("solver process is gone")
        try:
            self.proc.stdin.write(text + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as e:
            raise SolverDied(f"write to solver failed: {e}") from e

    def _read_line(self, timeout: Optional[float]) -> str:
        try:
            line = self._lines.get(timeout=timeout)
        except queue.Empty:
            self.kill()
            raise SolverDied("per-check timeout")
        if line is None:
            raise SolverDied("solver closed its output")
        return line

    def _read_balanced(self, timeout: Optional[float]) -> str:
        """Read lines until parentheses balance (get-value replies may span
        an unpredictable number of lines)."""
        buf = ""
        while True:
            line = self._read_line(timeout)
            buf += line + "\n"
            if buf.count("(") == buf.count(")") and buf.strip():
                return buf

    def _check_timeout(self) -> Optional[float]:
        if self.config.per_check_timeout_ms is None:
            return None
        return self.config.per_check_timeout_ms / 1000.0 + self.GRACE_S

    # --- setup ---

    def _handshake(self):
        self._send("(set-option :produce-models true)")
        logic = self.config.logic
        if logic is None:
            logic = "ALL"
        if logic:  # empty string opts out of set-logic entirely
            self._send(f"(set-logic {logic})")
        if self.config.per_check_timeout_ms is not None:
            self._send(f"(set-option :timeout {self.config.per_check_timeout_ms})")
        for v in self.model.variables:
            sort = "Int" if (self.integer_sorts and v.kind is not VarKind.CONTINUOUS) \
                else "Real"
            self._send(f"(declare-const {self.names[v.vid]} {sort})")
        for v in self.model.variables:
            int_sorted = self.integer_sorts and v.kind is not VarKind.CONTINUOUS
            if v.lower is not None:
                # Fractional bounds on Int-sorted symbols are tightened to the
                # nearest integer (sound, and avoids mixed-sort literals).
                lo = emit_int(-(-v.lower.numerator // v.lower.denominator)) \
                    if int_sorted else emit_rat(v.lower)
                self._send(f"(assert (>= {self.names[v.vid]} {lo}))")
            if v.upper is not None:
                hi = emit_int(v.upper.numerator // v.upper.denominator) \
                    if int_sorted else emit_rat(v.upper)
                self._send(f"(assert (<= {self.names[v.vid]} {hi}))")
        em = self.emitter
        for c in self.model.constraints:
            body = em.emit(c.body)
            if c.lower is not None and c.lower == c.upper:
                self._send(f"(assert (= {body} {emit_rat(c.lower)}))")
                continue
            if c.lower is not None:
                self._send(f"(assert (>= {body} {emit_rat(c.lower)}))")
            if c.upper is not None:
                self._send(f"(assert (<= {body} {emit_rat(c.upper)}))")
        for d in self.model.disjunctions:
            parts = []
            for opt in d.options:
                body = em.emit(opt.body)
                lits = []
                if opt.lower is not None and opt.lower == opt.upper:
                    lits.append(f"(= {body} {emit_rat(opt.lower)})")
                else:
                    if opt.lower is not None:
                        lits.append(f"(>= {body} {emit_rat(opt.lower)})")
                    if opt.upper is not None:
                        lits.append(f"(<= {body} {emit_rat(opt.upper)})")
                parts.append(lits[0] if len(lits) == 1 else "(and " + " ".join(lits) + ")")
            self._send("(assert (or " + " ".join(parts) + "))")

    # --- public operations ---

    def declare_real(self, symbol: str):
        self._send(f"(declare-const {symbol} Real)")
        self.extra_symbols.append(symbol)

    def assert_text(self, text: str, permanent: bool = False):
        self._send(f"(assert {text})")
        if permanent:
            self._permanent.append([self.depth, text])

    def assert_formula(self, f: Formula, permanent: bool = False):
        self.assert_text(self.emitter.emit_formula(f), permanent=permanent)

    def push(self):
        self._send("(push 1)")
        self.depth += 1

    def pop(self):
        if self.depth < 1:
            raise PopOnEmptyStack("pop at depth 0")
        self._send("(pop 1)")
        self.depth -= 1
        # Re-assert permanent formulas that the pop just retracted.
        for entry in self._permanent:
            if entry[0] > self.depth:
                self._send(f"(assert {entry[1]})")
                entry[0] = self.depth

    def check_sat(self) -> SatResult:
        self._send("(check-sat)")
        timeout = self._check_timeout()
        line = self._read_line(timeout).strip()
        while line == "" or line == "success":
            line = self._read_line(timeout).strip()
        if line == "sat":
            return self._get_model(timeout)
        if line == "unsat":
            return SatResult("unsat")
        if line == "unknown" or line == "timeout":
            return SatResult("unknown", reason=line)
        if line.startswith("(error"):
            raise ProtocolError(f"solver error: {line}")
        raise ProtocolError(f"unexpected check-sat reply: {line!r}")

    def _get_model(self, timeout: Optional[float]) -> SatResult:
        symbols = [self.names[v.vid] for v in self.model.variables] + self.extra_symbols
        if not symbols:
            return SatResult("sat", assignment={})
        self._send("(get-value (" + " ".join(symbols) + "))")
        text = self._read_balanced(timeout)
        if text.lstrip().startswith("(error"):
            raise ProtocolError(f"get-value failed: {text.strip()}")
        node, _ = parse_sexpr(tokenize_sexpr(text))
        values = {}
        unparseable = False
        for pair in node:
            if not isinstance(pair, list) or len(pair) != 2 or not isinstance(pair[0], str):
                raise ProtocolError(f"malformed get-value pair: {pair!r}")
            val = parse_value(pair[1])
            if val is None:
                unparseable = True
            else:
                values[pair[0]] = val
        by_name = dict(values)
        assignment = None
        if not unparseable:
            assignment = {
                v.vid: by_name[self.names[v.vid]] for v in self.model.variables
            }
        return SatResult("sat", assignment=assignment, values=by_name,
                         unparseable=unparseable)

    def kill(self):
        try:
            self.proc.kill()
        except OSError:
            pass

    def close(self):
        if self._closed:
            return
        self._closed = True
        try:
            if self.proc.poll() is None:
                self.proc.stdin.write("(exit)\n")
                self.proc.stdin.flush()
        except (BrokenPipeError, OSError, ValueError):
            pass
        try:
            self.proc.wait(timeout=2)
        except subprocess.TimeoutExpired:
            self.kill()
            try:
                self.proc.wait(timeout=2)
            except subprocess.TimeoutExpired:
                pass
        try:
            self.proc.stdin.close()
        except (OSError, ValueError):
            pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def open_session(config: SolverConfig, model: Model, integer_sorts: bool) -> SmtSession:
    return SmtSession(config, model, integer_sorts)
