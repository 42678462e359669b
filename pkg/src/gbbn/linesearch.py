"""
Backtracking line searches: monotone Armijo and the max-type nonmonotone rule.

Both searches share one backtracking loop. Trial points are clipped to the box and
a trial whose objectives are not finite counts as a failed acceptance test.
"""

import logging
from collections import deque
from typing import Deque, List, Optional, Tuple

import numpy as np

from .config import ConfigurationError, LineSearchConfig
from .interfaces import BacktrackLimitExceeded, DimensionMismatch
from .problems import ProblemInstance

logger = logging.getLogger(__name__)

SearchResult = Tuple[float, np.ndarray, np.ndarray, int]


class NonmonotoneMemory:
    """
    Window of recent accepted objective vectors.

    m(0) = 0 and m(k) = min(m(k-1) + 1, M - 1); the reference value is the
    componentwise max of the last m(k) + 1 stored vectors.
    """

    def __init__(self, memory_M: int):
        if not isinstance(memory_M, int) or memory_M < 1:
            raise ConfigurationError("Memory size M must be a positive integer")
        self.memory_M = memory_M
        self.history: Deque[np.ndarray] = deque(maxlen=memory_M)
        self.k = -1
        self.mk = 0

    def push(self, f: np.ndarray) -> None:
        """Store the objective vector of a newly accepted iterate."""
        f = np.array(f, dtype=float)
        if self.history and f.shape != self.history[-1].shape:
            raise DimensionMismatch("Objective vectors in the memory must have equal length")
        if self.k < 0:
            self.k = 0
            self.mk = 0
        else:
            self.k += 1
            self.mk = min(self.mk + 1, self.memory_M - 1)
        self.history.append(f)

    def window(self) -> List[np.ndarray]:
        """The m(k) + 1 vectors entering the current reference value."""
        return list(self.history)[-(self.mk + 1):]

    @property
    def reference(self) -> np.ndarray:
        """c_k, the componentwise max over the window."""
        if not self.history:
            raise ValueError("Nonmonotone memory is empty")
        return np.max(np.vstack(self.window()), axis=0)

    def __len__(self) -> int:
        return len(self.history)


def cap_to_box(x, d, alpha0: float, lower, upper) -> float:
    """
    Largest step up to alpha0 keeping x + alpha d inside the box.

    Coordinates with d_j = 0 never bind. Returns 0 when x sits on a face and d
    points out of it.
    """
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)

    beta_max = np.inf
    up = d > 0
    if up.any():
        beta_max = min(beta_max, float(np.min((upper[up] - x[up]) / d[up])))
    down = d < 0
    if down.any():
        beta_max = min(beta_max, float(np.min((lower[down] - x[down]) / d[down])))
    if beta_max <= 0:
        return 0.0
    return min(alpha0, beta_max)


def step_limit(p: ProblemInstance, x, d, alpha0: float) -> float:
    """
    Largest step up to alpha0 that keeps x + alpha d in the box of p and on the
    same side of its singular set.
    """
    return min(cap_to_box(x, d, alpha0, p.lower, p.upper), p.regular_step(x, d))


def nonmonotone_accept(f_trial, c_k, alpha: float, Jd, sigma: float) -> bool:
    """Whether f_trial <= c_k + sigma alpha Jd holds in every component."""
    f_trial = np.asarray(f_trial, dtype=float)
    if not np.all(np.isfinite(f_trial)):
        return False
    return bool(np.all(f_trial <= np.asarray(c_k) + sigma * alpha * np.asarray(Jd)))


def _trial_value(p: ProblemInstance, x: np.ndarray) -> Optional[np.ndarray]:
    with np.errstate(all='ignore'):
        f = np.asarray(p.evaluate(x), dtype=float)
    if not np.all(np.isfinite(f)):
        return None
    return f


def _backtrack(p: ProblemInstance, x: np.ndarray, d: np.ndarray, reference: np.ndarray,
               jd: np.ndarray, alpha: float, cfg: LineSearchConfig) -> SearchResult:
    for trials in range(1, cfg.max_backtracks + 2):
        x_trial = np.clip(x + alpha * d, p.lower, p.upper)
        f_trial = _trial_value(p, x_trial)
        if f_trial is not None and nonmonotone_accept(f_trial, reference, alpha, jd, cfg.sigma):
            return alpha, x_trial, f_trial, trials
        alpha *= cfg.delta
    raise BacktrackLimitExceeded(
        f"{p.name}: no acceptable step after {cfg.max_backtracks} reductions",
        trials=cfg.max_backtracks + 1,
        alpha=alpha,
    )


def armijo(p: ProblemInstance, x, d, J, f_x, cfg: LineSearchConfig,
           alpha0: float = 1.0) -> SearchResult:
    """
    Monotone Armijo backtracking from the capped alpha0.

    Args:
        p: Problem instance
        x: Current point
        d: Descent direction
        J: Jacobian at x
        f_x: Objective values at x
        cfg: Line search parameters
        alpha0: Initial step before the box and singular-set caps

    Returns:
        Tuple (accepted step, new point, new objectives, trial count)

    Raises:
        BacktrackLimitExceeded: If no step is accepted within cfg.max_backtracks reductions
    """
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    start = step_limit(p, x, d, alpha0)
    jd = np.asarray(J, dtype=float) @ d
    return _backtrack(p, x, d, np.asarray(f_x, dtype=float), jd, start, cfg)


def nonmonotone_search(p: ProblemInstance, x, d, J, memory: NonmonotoneMemory,
                       alpha0: float, cfg: LineSearchConfig) -> SearchResult:
    """
    Max-type nonmonotone backtracking against the memory's reference value.

    The accepted objective vector is pushed to the memory before returning.

    Args:
        p: Problem instance
        x: Current point
        d: Descent direction
        J: Jacobian at x
        memory: Memory holding the accepted iterates so far
        alpha0: Initial step before the caps, strictly positive
        cfg: Line search parameters

    Returns:
        Tuple (accepted step, new point, new objectives, trial count)

    Raises:
        ConfigurationError: If alpha0 is not positive
        BacktrackLimitExceeded: If no step is accepted within cfg.max_backtracks reductions
    """
    if not alpha0 > 0:
        raise ConfigurationError(f"Initial step must be positive, got {alpha0}")
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    start = step_limit(p, x, d, alpha0)
    jd = np.asarray(J, dtype=float) @ d
    result = _backtrack(p, x, d, memory.reference, jd, start, cfg)
    memory.push(result[2])
    return result
