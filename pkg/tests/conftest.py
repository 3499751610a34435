import sys
from pathlib import Path

import pytest

from smtopt.smt import SolverConfig
from smtopt.solvers import find_default_solver

STUB = Path(__file__).parent / "stub_solver.py"


@pytest.fixture(scope="session")
def solver_cfg() -> SolverConfig:
    cfg = find_default_solver()
    if cfg is None:
        pytest.skip("no SMT solver available (install z3 or node, or set "
                    "MINLP_SMT_SOLVER)")
    return cfg


@pytest.fixture(scope="session")
def unknown_solver_cfg() -> SolverConfig:
    """A solver that answers unknown to everything."""
    return SolverConfig(command=sys.executable, args=(str(STUB), "unknown"))


@pytest.fixture(scope="session")
def sleeping_solver_cfg() -> SolverConfig:
    """A solver that hangs on check-sat (cancellation target)."""
    return SolverConfig(command=sys.executable, args=(str(STUB), "sleep"))
