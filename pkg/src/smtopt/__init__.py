"""SMT-backed MINLP optimization to a specified absolute accuracy.

Optimization is reduced to repeated SMT feasibility checks; complementary
reduction strategies (feature vectors) race in parallel and the first
definitive result wins.
"""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    Assignment,
    Constraint,
    Model,
    Objective,
    ProblemClass,
    Sense,
    VarKind,
    Variable,
    classify,
    normalize_to_min,
)
from .cropt import OptOutcome, OptStatus  # noqa: F401
from .portfolio import (  # noqa: F401
    CrMethod,
    FeatureVector,
    Preprocess,
    default_vectors,
    run_portfolio,
)
from .smt import SolverConfig  # noqa: F401
