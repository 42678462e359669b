"""
Data models for the gbbn package with validation.

This module contains the value objects passed between the dual engine, the direction
routines, the solvers and the benchmark harness. Every model validates itself on
construction and raises ValidationError when an invariant does not hold.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, FrozenSet, List, Optional, Tuple

import numpy as np

from .interfaces import GBBNError

SIMPLEX_TOL = 1e-12


class ValidationError(GBBNError):
    """Raised when data validation fails."""
    pass


class TerminationReason(Enum):
    """Why a solver run stopped."""
    THETA_SMALL = "ThetaSmall"
    MAX_ITER = "MaxIter"
    BACKTRACK_FAIL = "BacktrackFail"


def _as_vector(values, name: str) -> np.ndarray:
    array = np.asarray(values, dtype=float)
    if array.ndim != 1:
        raise ValidationError(f"{name} must be a one-dimensional vector")
    return array


@dataclass
class SimplexWeights:
    """Convex combination weights lambda on the unit simplex."""
    lam: np.ndarray

    def __post_init__(self):
        self.lam = _as_vector(self.lam, "Weights")
        self.validate()

    def validate(self) -> None:
        """
        Validate simplex membership.

        Raises:
            ValidationError: If a weight is negative or the weights do not sum to one
        """
        if self.lam.size == 0:
            raise ValidationError("Weights cannot be empty")

        if not np.all(np.isfinite(self.lam)):
            raise ValidationError("Weights must be finite")

        if np.any(self.lam < 0):
            raise ValidationError(f"Weights must be nonnegative, got {self.lam}")

        if abs(float(self.lam.sum()) - 1.0) > SIMPLEX_TOL:
            raise ValidationError(f"Weights must sum to one, got {self.lam.sum():.17g}")

    @property
    def size(self) -> int:
        """Number of objectives the weights cover."""
        return int(self.lam.size)

    def support(self) -> Tuple[int, ...]:
        """Indices carrying positive weight."""
        return tuple(int(i) for i in np.flatnonzero(self.lam > 0))


@dataclass
class DualResult:
    """Solution of the simplex-constrained dual subproblem."""
    weights: SimplexWeights
    combined: np.ndarray
    value: float
    fw_gap: float
    iterations: int

    def __post_init__(self):
        self.combined = _as_vector(self.combined, "Combined gradient")
        self.validate()

    def validate(self) -> None:
        """
        Validate the dual result.

        Raises:
            ValidationError: If the value or gap is inconsistent
        """
        if self.fw_gap < 0:
            raise ValidationError("Frank-Wolfe gap cannot be negative")

        if self.value < 0:
            raise ValidationError("Dual value cannot be negative")

        if self.iterations < 0:
            raise ValidationError("Iteration count cannot be negative")


@dataclass
class DirectionOutcome:
    """Descent direction, optimal value and dual data at one point."""
    d: np.ndarray
    theta: float
    weights: SimplexWeights
    normalizers: np.ndarray
    active_set: FrozenSet[int]
    scaled_jacobian: np.ndarray
    frozen: Tuple[int, ...] = ()

    def __post_init__(self):
        self.d = _as_vector(self.d, "Direction")
        self.normalizers = _as_vector(self.normalizers, "Normalizers")
        self.active_set = frozenset(self.active_set)
        self.validate()

    def validate(self) -> None:
        """
        Validate shapes and signs.

        Raises:
            ValidationError: If theta is positive or the shapes disagree
        """
        if self.theta > 0:
            raise ValidationError(f"Theta must be nonpositive, got {self.theta}")

        if self.normalizers.size != self.weights.size:
            raise ValidationError("One normalizer per objective is required")

        if np.any(self.normalizers <= 0):
            raise ValidationError("Normalizers must be positive")

        if self.scaled_jacobian.shape != (self.weights.size, self.d.size):
            raise ValidationError("Scaled Jacobian shape does not match direction and weights")

    @property
    def norm_squared(self) -> float:
        """Squared Euclidean norm of the direction."""
        return float(self.d @ self.d)


@dataclass
class IterationLog:
    """Per-iteration trace entry kept when trace recording is enabled."""
    k: int
    x: np.ndarray
    f: np.ndarray
    reference: np.ndarray
    jd: np.ndarray
    theta: float
    alpha0: float
    alpha: float
    trials: int
    frozen: Tuple[int, ...] = ()

    @property
    def backtracks(self) -> int:
        """Number of step reductions before acceptance."""
        return self.trials - 1


@dataclass
class RunRecord:
    """Result of one solver run."""
    problem: str
    algorithm: str
    iterations: int
    fevals: int
    jevals: int
    accepted_steps: List[float]
    initial_steps: List[float]
    backtracks: List[int]
    theta_trace: List[float]
    x_final: np.ndarray
    f_final: np.ndarray
    terminated_by: TerminationReason
    wall_time: float
    eta: Optional[float] = None
    detail: str = ""
    trace: List[IterationLog] = field(default_factory=list)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """
        Validate trace lengths and signs.

        Raises:
            ValidationError: If the record is internally inconsistent
        """
        if self.iterations < 0:
            raise ValidationError("Iteration count cannot be negative")

        if len(self.accepted_steps) != self.iterations:
            raise ValidationError("One accepted step per iteration is required")

        if len(self.backtracks) != self.iterations:
            raise ValidationError("One backtrack count per iteration is required")

        if any(theta > 0 for theta in self.theta_trace):
            raise ValidationError("Theta trace must be nonpositive")

        if self.fevals < 1:
            raise ValidationError("At least the start point must be evaluated")

        if not isinstance(self.terminated_by, TerminationReason):
            raise ValidationError("Terminated by must be a TerminationReason")

    @property
    def final_theta(self) -> float:
        """Theta at the last evaluated iterate."""
        return self.theta_trace[-1] if self.theta_trace else 0.0

    @property
    def converged(self) -> bool:
        """Whether the run stopped on the criticality test."""
        return self.terminated_by is TerminationReason.THETA_SMALL

    def step_factors(self, delta: float) -> List[float]:
        """Backtracking factors t_k = delta ** l_k of the accepted steps."""
        return [delta ** count for count in self.backtracks]

    def to_dict(self) -> Dict[str, Any]:
        """Convert to a JSON-ready dictionary."""
        return {
            'problem': self.problem,
            'algorithm': self.algorithm,
            'eta': self.eta,
            'iterations': self.iterations,
            'fevals': self.fevals,
            'jevals': self.jevals,
            'accepted_steps': [float(a) for a in self.accepted_steps],
            'initial_steps': [float(a) for a in self.initial_steps],
            'backtracks': list(self.backtracks),
            'theta_trace': [float(t) for t in self.theta_trace],
            'x_final': [float(v) for v in self.x_final],
            'f_final': [float(v) for v in self.f_final],
            'terminated_by': self.terminated_by.value,
            'wall_time_ms': self.wall_time * 1000.0,
            'detail': self.detail,
        }


@dataclass
class BenchRow:
    """Aggregated metrics of one (problem, algorithm) pair."""
    problem: str
    algorithm: str
    eta: Optional[float]
    runs: int
    mean_iter: float
    mean_feval: float
    mean_stepsize: float
    mean_time_ms: float
    theta_small: int
    max_iter: int
    backtrack_fail: int
    start_digest: str = ""

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """
        Validate aggregate consistency.

        Raises:
            ValidationError: If counts do not add up to the number of runs
        """
        if self.runs < 1:
            raise ValidationError("A row needs at least one run")

        if self.mean_iter < 0:
            raise ValidationError("Mean iterations cannot be negative")

        if self.theta_small + self.max_iter + self.backtrack_fail != self.runs:
            raise ValidationError(
                f"Termination counts {self.theta_small}+{self.max_iter}+{self.backtrack_fail} "
                f"do not add up to {self.runs} runs"
            )


@dataclass
class BenchReport:
    """Collection of benchmark rows from one sweep."""
    rows: List[BenchRow] = field(default_factory=list)
    seed: int = 0
    sampler_version: str = ""

    def get_row(self, problem: str, algorithm: str) -> BenchRow:
        """
        Look up a row.

        Raises:
            KeyError: If the pair was not part of the sweep
        """
        for row in self.rows:
            if row.problem == problem and row.algorithm == algorithm:
                return row
        raise KeyError(f"No row for {problem}/{algorithm}")

    def problems(self) -> List[str]:
        """Problem names in report order without duplicates."""
        seen: List[str] = []
        for row in self.rows:
            if row.problem not in seen:
                seen.append(row.problem)
        return seen
