"""
Core interfaces and exception hierarchy for the gbbn package.

This module defines the contract every descent solver implements and the errors raised
across problems, the dual engine, line searches and the benchmark harness.
"""

from abc import ABC, abstractmethod
from typing import TYPE_CHECKING, Optional, Sequence

if TYPE_CHECKING:
    from .config import SolverConfig
    from .models import RunRecord
    from .problems import ProblemInstance


class DescentSolver(ABC):
    """Abstract base class for multiobjective descent solvers."""

    #: Registry key used by the solver factory and the command line.
    name: str = ""

    @abstractmethod
    def solve(self, problem: 'ProblemInstance', x0: Sequence[float],
              config: Optional['SolverConfig'] = None) -> 'RunRecord':
        """
        Run the descent loop from a feasible start point.

        Args:
            problem: Problem to minimize
            x0: Start point inside the problem box
            config: Solver parameters (defaults used when omitted)

        Returns:
            RunRecord describing the run

        Raises:
            NonFiniteValue: If the objectives are not finite at the start point
            DimensionMismatch: If x0 does not have length problem.n
        """
        pass

    @abstractmethod
    def get_description(self) -> str:
        """
        Get a one-line description of the method.

        Returns:
            Human readable description
        """
        pass

    @property
    def uses_normalization(self) -> bool:
        """Whether the direction subproblem works on normalized gradients."""
        return False


class GBBNError(Exception):
    """Base exception class for gbbn errors."""
    pass


class NonFiniteValue(GBBNError):
    """Raised when an objective value or gradient is NaN or infinite."""

    def __init__(self, message: str, problem: str = "", point=None):
        super().__init__(message)
        self.problem = problem
        self.point = point


class DimensionMismatch(GBBNError):
    """Raised when vectors or matrices have incompatible shapes."""
    pass


class ZeroGradientError(GBBNError):
    """Raised when plain normalization meets a zero gradient row."""

    def __init__(self, message: str, index: int = -1):
        super().__init__(message)
        self.index = index


class BacktrackLimitExceeded(GBBNError):
    """Raised when a line search runs out of backtracking steps."""

    def __init__(self, message: str, trials: int = 0, alpha: float = 0.0):
        super().__init__(message)
        self.trials = trials
        self.alpha = alpha


class BenchmarkError(GBBNError):
    """Raised when benchmark setup or report output fails."""
    pass
