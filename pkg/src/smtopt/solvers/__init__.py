"""External solver discovery and the bundled Z3-over-WASM pipe wrapper."""

from __future__ import annotations

import os
import shlex
import shutil
import sys
from importlib import resources
from typing import Optional

from ..smt import SolverConfig

ENV_VAR = "MINLP_SMT_SOLVER"


def z3pipe_path() -> str:
    """Filesystem path of the bundled Node wrapper around npm's z3-solver."""
    return str(resources.files(__package__).joinpath("z3pipe.mjs"))


def z3pipe_entry():
    """Console entry point: exec node on the bundled wrapper."""
    os.execvp("node", ["node", z3pipe_path(), *sys.argv[1:]])


def default_args_for(command: str) -> tuple:
    """Known-good argument presets, keyed on the executable basename."""
    base = os.path.basename(command)
    if base in ("z3", "z3.exe"):
        return ("-in",)
    return ()


def find_default_solver() -> Optional[SolverConfig]:
    """Locate a usable SMT-LIB solver: the MINLP_SMT_SOLVER environment
    variable, a z3 binary on PATH, or the bundled Node/WASM Z3."""
    env = os.environ.get(ENV_VAR)
    if env:
        parts = shlex.split(env)
        args = tuple(parts[1:]) or default_args_for(parts[0])
        return SolverConfig(command=parts[0], args=args)
    z3 = shutil.which("z3")
    if z3:
        return SolverConfig(command=z3, args=("-in",))
    node = shutil.which("node")
    if node:
        return SolverConfig(command=node, args=(z3pipe_path(),))
    return None
