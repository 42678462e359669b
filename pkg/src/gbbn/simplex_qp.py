"""
Frank-Wolfe solver for min over the unit simplex of phi(lambda) = 1/2 ||sum_i lambda_i g_i||^2.

The iteration works on the Gram matrix Q = G G^T, so the cost per step is O(m^2)
regardless of the dimension of the gradients. The gradient of phi is Q lambda.
"""

import logging
from typing import Optional, Sequence, Union

import numpy as np

from .config import ConfigurationError
from .interfaces import DimensionMismatch
from .models import DualResult, SimplexWeights

logger = logging.getLogger(__name__)


def _as_matrix(G: Union[np.ndarray, Sequence[Sequence[float]]]) -> np.ndarray:
    if isinstance(G, np.ndarray):
        if G.ndim != 2:
            raise DimensionMismatch(f"Gradient matrix must be two-dimensional, got shape {G.shape}")
        matrix = np.asarray(G, dtype=float)
    else:
        rows = [np.asarray(g, dtype=float).ravel() for g in G]
        if not rows:
            raise DimensionMismatch("At least one gradient is required")
        lengths = {row.size for row in rows}
        if len(lengths) != 1:
            raise DimensionMismatch(f"Gradients have different lengths: {sorted(lengths)}")
        matrix = np.vstack(rows)
    if matrix.shape[0] < 1:
        raise DimensionMismatch("At least one gradient is required")
    return matrix


def _away_vertex(lam: np.ndarray, grad: np.ndarray) -> int:
    support = np.flatnonzero(lam > 0)
    return int(support[np.argmax(grad[support])])


def solve_dual(G, tol: float = 1e-12, max_iter: Optional[int] = None,
               away_steps: bool = False) -> DualResult:
    """
    Minimize 1/2 ||G^T lambda||^2 over the unit simplex.

    Starts from the barycenter and moves toward the vertex with the smallest partial
    derivative (lowest index on ties) using the exact line search of the quadratic,
    clipped to [0, 1]. With away_steps the iteration may instead move weight off the
    worst supported vertex, which removes the zigzag of plain Frank-Wolfe on faces.

    Args:
        G: m gradients of equal length, as a list of vectors or an (m, n) array
        tol: Stop once the Frank-Wolfe gap drops to tol
        max_iter: Iteration cap, 50 m + 100 when omitted
        away_steps: Enable away and drop steps

    Returns:
        DualResult with the weights, combined vector, value and final gap

    Raises:
        DimensionMismatch: If the gradients have different lengths
        ConfigurationError: If tol is not positive
    """
    if not tol > 0:
        raise ConfigurationError(f"Dual tolerance must be positive, got {tol}")

    G = _as_matrix(G)
    m = G.shape[0]
    cap = 50 * m + 100 if max_iter is None else max_iter

    Q = G @ G.T
    lam = np.full(m, 1.0 / m)
    grad = Q @ lam
    iterations = 0

    for iterations in range(cap):
        j = int(np.argmin(grad))
        lam_grad = float(lam @ grad)
        gap = lam_grad - grad[j]
        if gap <= tol:
            break

        direction = -lam.copy()
        direction[j] += 1.0
        gamma_max = 1.0
        away = -1
        if away_steps:
            a = _away_vertex(lam, grad)
            if grad[a] - lam_grad > gap and lam[a] < 1.0:
                away = a
                direction = lam.copy()
                direction[a] -= 1.0
                gamma_max = lam[a] / (1.0 - lam[a])

        q_dir = Q @ direction
        curvature = float(direction @ q_dir)
        if curvature <= 0:
            break
        gamma = min(max(-float(direction @ grad) / curvature, 0.0), gamma_max)

        updated = lam + gamma * direction
        if away >= 0 and gamma == gamma_max:
            updated[away] = 0.0
        np.maximum(updated, 0.0, out=updated)
        if np.array_equal(updated, lam):
            break
        lam = updated
        grad = grad + gamma * q_dir
    else:
        iterations = cap

    lam = lam / lam.sum()
    combined = G.T @ lam
    value = 0.5 * float(combined @ combined)
    grad = Q @ lam
    fw_gap = max(float(lam @ grad - grad.min()), 0.0)
    logger.debug("Dual solve: m=%d iterations=%d gap=%.3e", m, iterations, fw_gap)
    return DualResult(
        weights=SimplexWeights(lam),
        combined=combined,
        value=value,
        fw_gap=fw_gap,
        iterations=iterations,
    )
