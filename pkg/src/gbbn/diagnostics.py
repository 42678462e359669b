"""
Dominance predicates and post-hoc checks of solver runs.
"""

import logging
from typing import List, Optional

import numpy as np

from .config import SolverConfig
from .interfaces import DimensionMismatch
from .models import RunRecord, TerminationReason, ValidationError
from .problems import ProblemInstance

logger = logging.getLogger(__name__)


def dominates(fa, fb) -> bool:
    """True if fa Pareto-dominates fb under minimization."""
    fa = np.asarray(fa, dtype=float)
    fb = np.asarray(fb, dtype=float)
    if fa.shape != fb.shape:
        raise DimensionMismatch("Objective vectors must have equal length")
    return bool(np.all(fa <= fb) and np.any(fa < fb))


def weakly_dominates(fa, fb) -> bool:
    """True if fa is no worse than fb in every objective."""
    return bool(np.all(np.asarray(fa, dtype=float) <= np.asarray(fb, dtype=float)))


def nondominated_mask(F) -> np.ndarray:
    """
    Boolean mask of the rows of F not dominated by any other row.

    Args:
        F: (N, m) array of objective vectors to minimize

    Returns:
        Length-N boolean array
    """
    F = np.asarray(F, dtype=float)
    if F.ndim != 2:
        raise DimensionMismatch(f"Objective matrix must be two-dimensional, got shape {F.shape}")
    count = F.shape[0]
    mask = np.ones(count, dtype=bool)
    for i in range(count):
        others = np.delete(F, i, axis=0)
        if others.size == 0:
            continue
        le_all = (others <= F[i]).all(axis=1)
        lt_any = (others < F[i]).any(axis=1)
        if (le_all & lt_any).any():
            mask[i] = False
    return mask


def is_descent_direction(J, d) -> bool:
    """Whether <grad f_i, d> < 0 for every objective."""
    return bool(np.all(np.asarray(J, dtype=float) @ np.asarray(d, dtype=float) < 0))


def audit_run(problem: ProblemInstance, record: RunRecord,
              cfg: Optional[SolverConfig] = None, box_slack: float = 1e-12) -> List[str]:
    """
    Re-check a traced run against its acceptance rules.

    Checks that every accepted step satisfies its acceptance test, that the reference
    values c_k never increase, that all iterates lie in the box and that the termination
    flag agrees with the final theta.

    Args:
        problem: Problem the run was made on
        record: Run recorded with record_trace enabled
        cfg: Solver configuration used for the run
        box_slack: Allowed violation of the bounds

    Returns:
        List of violation messages, empty when the run is clean

    Raises:
        ValidationError: If the record carries no trace for its iterations
    """
    cfg = cfg or SolverConfig()
    if record.iterations and len(record.trace) != record.iterations:
        raise ValidationError("Audit needs a run recorded with record_trace enabled")

    violations: List[str] = []
    sigma = cfg.ls.sigma
    for index, entry in enumerate(record.trace):
        f_next = record.trace[index + 1].f if index + 1 < len(record.trace) else record.f_final
        bound = entry.reference + sigma * entry.alpha * entry.jd
        if not np.all(f_next <= bound):
            violations.append(f"k={entry.k}: accepted step violates its acceptance test")
        if index and np.any(entry.reference > record.trace[index - 1].reference):
            violations.append(f"k={entry.k}: reference value increased")
        if not problem.contains(entry.x, box_slack):
            violations.append(f"k={entry.k}: iterate outside the box")
        if entry.theta > 0:
            violations.append(f"k={entry.k}: positive theta")

    if not problem.contains(record.x_final, box_slack):
        violations.append("final iterate outside the box")

    small = abs(record.final_theta) < cfg.eps
    if (record.terminated_by is TerminationReason.THETA_SMALL) != small:
        violations.append(
            f"termination {record.terminated_by.value} disagrees with final |theta| = "
            f"{abs(record.final_theta):.3e}"
        )

    if violations:
        logger.warning("%s/%s: %d audit violations", record.problem, record.algorithm, len(violations))
    return violations
