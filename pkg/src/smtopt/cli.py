"""Command-line front end.

Exit codes: 0 optimal, 1 infeasible, 2 unknown/timeout, 3 bound exceeded,
64 usage error, 65 input parse error.
"""

from __future__ import annotations

import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import click

from . import __version__
from .cropt import OptStatus
from .errors import ParseError, SmtOptError
from .model import Model, Sense, classify
from .mps import parse_mps
from .oracle import brute_force
from .osil import parse_osil
from .portfolio import (
    PortfolioResult,
    default_vectors,
    parse_vector_name,
    run_portfolio,
)
from .report import report_table
from .smt import SolverConfig
from .solvers import ENV_VAR, default_args_for, find_default_solver

EXIT_OPTIMAL = 0
EXIT_INFEASIBLE = 1
EXIT_UNKNOWN = 2
EXIT_BOUND_EXCEEDED = 3
EXIT_USAGE = 64
EXIT_PARSE = 65


def format_decimal(value: Fraction, places: int = 6) -> str:
    """Decimal rendering truncated toward the exact rational (never rounds
    past the true value)."""
    sign = "-" if value < 0 else ""
    v = abs(value)
    scaled = v.numerator * 10 ** places // v.denominator
    whole, frac = divmod(scaled, 10 ** places)
    return f"{sign}{whole}.{str(frac).zfill(places)}"


def _load_model(path: Path, fmt: str, free_vars: bool) -> Model:
    data = path.read_bytes()
    if fmt == "auto":
        suffix = path.suffix.lower()
        if suffix in (".osil", ".xml"):
            fmt = "osil"
        elif suffix == ".mps":
            fmt = "mps"
        else:
            head = data[:4096].lstrip()
            fmt = "osil" if head.startswith(b"<") else "mps"
    if fmt == "osil":
        return parse_osil(data, free_variables=free_vars)
    return parse_mps(data.decode("utf-8"))


def _serialize(result: PortfolioResult, wall_time: float) -> dict:
    out = result.outcome
    return {
        "status": out.status.value,
        "value": str(out.value) if out.value is not None else None,
        "value_decimal": format_decimal(out.value) if out.value is not None else None,
        "winner": result.winner,
        "reason": out.reason,
        "wall_time": wall_time,
        "witness": {str(k): str(v) for k, v in (out.witness or {}).items()},
        "bracket": None if out.bracket is None else {
            "lo": str(out.bracket.lo) if out.bracket.lo is not None else None,
            "hi": str(out.bracket.hi) if out.bracket.hi is not None else None,
        },
        "per_worker": [
            {
                "vector": r.vector,
                "status": r.outcome.status.value if r.outcome else "missing",
                "value": str(r.outcome.value)
                         if r.outcome and r.outcome.value is not None else None,
                "reason": r.outcome.reason if r.outcome else "",
                "wall_time": r.wall_time,
                "cuts_added": r.cut_stats.cuts_added,
                "repair_iterations": r.cut_stats.repair_iterations,
                "probe_count": r.probe_count,
                "cancelled": r.cancelled,
            }
            for r in result.per_worker
        ],
    }


@click.group()
@click.version_option(__version__)
def main():
    """SMT-backed MINLP optimization to a specified absolute accuracy."""


@main.command()
@click.argument("input_path", type=click.Path(exists=True, path_type=Path))
@click.option("--format", "fmt", type=click.Choice(["osil", "mps", "auto"]),
              default="auto", show_default=True)
@click.option("--accuracy", default="0.001", show_default=True,
              help="Absolute accuracy epsilon (exact rational or decimal).")
@click.option("--timeout", type=float, default=1800.0, show_default=True,
              help="Global timeout in seconds.")
@click.option("--solver", "solver_path", default=None,
              help=f"SMT solver executable (fallback: ${ENV_VAR}, then "
                   "z3 on PATH, then the bundled node wrapper).")
@click.option("--solver-arg", "solver_args", multiple=True,
              help="Extra solver argument (repeatable).")
@click.option("--logic", default=None, help="SMT-LIB logic (default ALL).")
@click.option("--native-power", is_flag=True,
              help="Emit (^ b k) instead of unrolling integer powers.")
@click.option("--per-check-timeout", type=int, default=None,
              help="Per check-sat timeout in milliseconds.")
@click.option("--jobs", type=int, default=None,
              help="Max concurrent workers (default: all vectors).")
@click.option("--vectors", "vector_spec", default=None,
              help="Comma-separated vector names, e.g. "
                   "bin_flattening_hybrid,allinone_naive.")
@click.option("--log-dir", type=click.Path(path_type=Path), default=None)
@click.option("--json", "as_json", is_flag=True, help="Machine output.")
@click.option("--seq", is_flag=True,
              help="Deterministic sequential mode (fixed vector order).")
@click.option("--cross-check", is_flag=True,
              help="Run every vector to completion and compare.")
@click.option("--free-vars", is_flag=True,
              help="Treat the OSiL default lower bound as -inf instead of 0.")
def solve(input_path, fmt, accuracy, timeout, solver_path, solver_args, logic,
          native_power, per_check_timeout, jobs, vector_spec, log_dir,
          as_json, seq, cross_check, free_vars):
    """Optimize the model in INPUT_PATH."""
    try:
        eps = Fraction(accuracy)
        if eps <= 0:
            raise ValueError("accuracy must be positive")
    except (ValueError, ZeroDivisionError) as e:
        click.echo(f"error: bad accuracy: {e}", err=True)
        sys.exit(EXIT_USAGE)

    if solver_path is not None:
        args = tuple(solver_args) or default_args_for(solver_path)
        solver = SolverConfig(command=solver_path, args=args)
    else:
        solver = find_default_solver()
        if solver is None:
            click.echo(f"error: no SMT solver found; pass --solver or set "
                       f"${ENV_VAR}", err=True)
            sys.exit(EXIT_USAGE)
    if logic is not None or native_power or per_check_timeout is not None:
        from dataclasses import replace
        solver = replace(
            solver,
            logic=logic if logic is not None else solver.logic,
            use_native_power=native_power or solver.use_native_power,
            per_check_timeout_ms=per_check_timeout
            if per_check_timeout is not None else solver.per_check_timeout_ms)

    try:
        model = _load_model(input_path, fmt, free_vars)
    except ParseError as e:
        click.echo(f"parse error: {e}", err=True)
        sys.exit(EXIT_PARSE)

    pclass = classify(model)
    if vector_spec:
        try:
            vectors = [parse_vector_name(n.strip(), solver)
                       for n in vector_spec.split(",") if n.strip()]
        except SmtOptError as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_USAGE)
    else:
        vectors = default_vectors(pclass, solver)

    start = time.monotonic()
    result = run_portfolio(
        model, vectors, eps, timeout_s=timeout, jobs=jobs, seq=seq,
        cross_check=cross_check, log_dir=log_dir, benchmark=input_path.stem)
    wall = time.monotonic() - start

    if as_json:
        click.echo(json.dumps(_serialize(result, wall), indent=2))
    else:
        out = result.outcome
        click.echo(f"problem class: {pclass.value}  "
                   f"({len(vectors)} feature vectors)")
        click.echo(f"status: {out.status.value}"
                   + (f" ({out.reason})" if out.reason else ""))
        if out.value is not None:
            sense = "maximum" if model.objective.sense is Sense.MAXIMIZE \
                else "minimum"
            click.echo(f"{sense}: {format_decimal(out.value)} "
                       f"(exact {out.value})")
        if result.winner:
            click.echo(f"winning vector: {result.winner}")
        click.echo(f"wall time: {wall:.2f}s")

    status = result.outcome.status
    sys.exit({
        OptStatus.OPTIMAL: EXIT_OPTIMAL,
        OptStatus.INFEASIBLE: EXIT_INFEASIBLE,
        OptStatus.UNKNOWN: EXIT_UNKNOWN,
        OptStatus.BOUND_EXCEEDED: EXIT_BOUND_EXCEEDED,
    }[status])


@main.command()
@click.argument("log_dir", type=click.Path(exists=True, path_type=Path))
@click.option("--out-dir", type=click.Path(path_type=Path), default=None,
              help="Where to write report.csv and report.png "
                   "(default: LOG_DIR).")
def report(log_dir, out_dir):
    """Render the benchmark x vector runtime grid from worker logs."""
    try:
        click.echo(report_table(log_dir, out_dir))
    except SmtOptError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_USAGE)


@main.command(hidden=True, name="brute-force")
@click.argument("input_path", type=click.Path(exists=True, path_type=Path))
@click.option("--format", "fmt", type=click.Choice(["osil", "mps", "auto"]),
              default="auto")
@click.option("--grid", default="1/100", show_default=True,
              help="Continuous grid step (exact rational).")
@click.option("--lipschitz", default="0",
              help="Lipschitz slack factor for constraint tolerance.")
@click.option("--free-vars", is_flag=True)
def brute_force_cmd(input_path, fmt, grid, lipschitz, free_vars):
    """Independent enumeration oracle for tiny instances (test harness)."""
    try:
        model = _load_model(input_path, fmt, free_vars)
    except ParseError as e:
        click.echo(f"parse error: {e}", err=True)
        sys.exit(EXIT_PARSE)
    try:
        out = brute_force(model, Fraction(grid), Fraction(lipschitz))
    except SmtOptError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_USAGE)
    click.echo(f"status: {out.status.value}")
    if out.value is not None:
        click.echo(f"value: {format_decimal(out.value)} (exact {out.value})")
    sys.exit(EXIT_OPTIMAL if out.status is OptStatus.OPTIMAL
             else EXIT_INFEASIBLE if out.status is OptStatus.INFEASIBLE
             else EXIT_UNKNOWN)


if __name__ == "__main__":
    main()
