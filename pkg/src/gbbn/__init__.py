"""
gbbn - multiobjective gradient descent with Barzilai-Borwein steps and gradient normalization.

The package bundles the descent solvers (steepest descent, global BB, normalized global BB),
the dual subproblem engine they share, a suite of box-constrained test problems and the
benchmark harness that drives them from the ``gbbn-bench`` command.
"""

__version__ = "0.1.0"
__author__ = "GBBN Team"

from .interfaces import (
    GBBNError,
    NonFiniteValue,
    DimensionMismatch,
    ZeroGradientError,
    BacktrackLimitExceeded,
    BenchmarkError,
    DescentSolver,
)
from .models import TerminationReason, RunRecord, DirectionOutcome, DualResult, SimplexWeights
from .config import SolverConfig, LineSearchConfig, DualConfig, BenchConfig
from .problems import ProblemInstance, suite, get_problem, eval_pair, check_gradients
from .solvers import solve_sdmo, solve_gbb, solve_gbbn, pareto_critical_residual

__all__ = [
    "GBBNError",
    "NonFiniteValue",
    "DimensionMismatch",
    "ZeroGradientError",
    "BacktrackLimitExceeded",
    "BenchmarkError",
    "DescentSolver",
    "TerminationReason",
    "RunRecord",
    "DirectionOutcome",
    "DualResult",
    "SimplexWeights",
    "SolverConfig",
    "LineSearchConfig",
    "DualConfig",
    "BenchConfig",
    "ProblemInstance",
    "suite",
    "get_problem",
    "eval_pair",
    "check_gradients",
    "solve_sdmo",
    "solve_gbb",
    "solve_gbbn",
    "pareto_critical_residual",
]
