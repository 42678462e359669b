"""
Common descent directions from the dual of the min-max subproblem.

For a Jacobian J the plain subproblem uses the gradient rows as they are; the
normalized subproblem first divides row i by ||row i|| + eta. Either way the direction
is d = -sum_i lambda_i g_i with lambda from the simplex dual and theta = -1/2 ||d||^2.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from .config import ConfigurationError, DualConfig
from .interfaces import DimensionMismatch, ZeroGradientError
from .models import DirectionOutcome
from .simplex_qp import solve_dual

logger = logging.getLogger(__name__)

#: Distance (relative to 1 + |bound|) under which a coordinate counts as sitting on a bound.
BOUND_TOL = 1e-12


def _as_jacobian(J) -> np.ndarray:
    J = np.asarray(J, dtype=float)
    if J.ndim != 2 or J.shape[0] < 1 or J.shape[1] < 1:
        raise DimensionMismatch(f"Jacobian must be a nonempty (m, n) matrix, got shape {J.shape}")
    return J


def normalize_gradients(J, eta: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Scale each gradient row by 1 / (||row|| + eta).

    Args:
        J: (m, n) Jacobian
        eta: Normalization constant, strictly positive

    Returns:
        Tuple (scaled Jacobian, normalizers)

    Raises:
        ConfigurationError: If eta is not positive
    """
    if not eta > 0:
        raise ConfigurationError(f"Eta must be positive for normalization, got {eta}")
    J = _as_jacobian(J)
    normalizers = np.linalg.norm(J, axis=1) + eta
    return J / normalizers[:, None], normalizers


def unit_normalize_gradients(J) -> Tuple[np.ndarray, np.ndarray]:
    """
    Scale each gradient row to unit length (the eta = 0 variant).

    Raises:
        ZeroGradientError: If some row is zero
    """
    J = _as_jacobian(J)
    normalizers = np.linalg.norm(J, axis=1)
    zero_rows = np.flatnonzero(normalizers == 0)
    if zero_rows.size:
        index = int(zero_rows[0])
        raise ZeroGradientError(f"Gradient {index} vanishes, plain normalization is undefined", index)
    return J / normalizers[:, None], normalizers


def _scaled(J, eta: Optional[float]) -> Tuple[np.ndarray, np.ndarray]:
    if eta is None:
        J = _as_jacobian(J)
        return J, np.ones(J.shape[0])
    if eta == 0:
        return unit_normalize_gradients(J)
    return normalize_gradients(J, eta)


def _solve(scaled: np.ndarray, normalizers: np.ndarray, dual: DualConfig,
           frozen: Tuple[int, ...] = ()) -> DirectionOutcome:
    result = solve_dual(
        scaled,
        tol=dual.tol,
        max_iter=dual.iteration_cap(scaled.shape[0]),
        away_steps=dual.away_steps,
    )
    d = -result.combined
    norm_sq = float(d @ d)
    atol = 1e-9 * (1.0 + norm_sq)
    slack = np.abs(scaled @ d + norm_sq)
    return DirectionOutcome(
        d=d,
        theta=-0.5 * norm_sq,
        weights=result.weights,
        normalizers=normalizers,
        active_set=frozenset(int(i) for i in np.flatnonzero(slack <= atol)),
        scaled_jacobian=scaled,
        frozen=frozen,
    )


def steepest_direction(J, dual: Optional[DualConfig] = None) -> DirectionOutcome:
    """
    Steepest common descent direction from the unscaled gradients.

    Args:
        J: (m, n) Jacobian, rows are gradients
        dual: Dual solver settings

    Returns:
        DirectionOutcome with unit normalizers
    """
    scaled, normalizers = _scaled(J, None)
    return _solve(scaled, normalizers, dual or DualConfig())


def normalized_direction(J, eta: float, dual: Optional[DualConfig] = None) -> DirectionOutcome:
    """
    Common descent direction from gradients scaled by 1 / (||g_i|| + eta).

    An eta of exactly 0 selects plain normalization g_i / ||g_i||.

    Args:
        J: (m, n) Jacobian
        eta: Normalization constant
        dual: Dual solver settings

    Returns:
        DirectionOutcome with the normalizers used

    Raises:
        ConfigurationError: If eta is negative
        ZeroGradientError: If eta is 0 and some gradient vanishes
    """
    if eta < 0:
        raise ConfigurationError(f"Eta must be nonnegative, got {eta}")
    scaled, normalizers = _scaled(J, eta)
    return _solve(scaled, normalizers, dual or DualConfig())


def face_direction(J, x, lower, upper, eta: Optional[float] = None,
                   dual: Optional[DualConfig] = None) -> DirectionOutcome:
    """
    Direction restricted to the face of the box the current point sits on.

    Coordinates on a bound whose direction component points out of the box are frozen
    (their Jacobian column is zeroed) and the direction is recomputed until no further
    coordinate needs freezing. At interior points this is the unrestricted direction.

    Args:
        J: (m, n) Jacobian
        x: Current point
        lower: Lower bounds
        upper: Upper bounds
        eta: None for the plain subproblem, 0 for unit normalization, > 0 for
            normalization with that constant
        dual: Dual solver settings

    Returns:
        DirectionOutcome whose frozen field lists the frozen coordinates
    """
    dual = dual or DualConfig()
    scaled, normalizers = _scaled(J, eta)
    x = np.asarray(x, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if x.shape != (scaled.shape[1],):
        raise DimensionMismatch(f"Point has shape {x.shape}, Jacobian has {scaled.shape[1]} columns")

    at_lower = x - lower <= BOUND_TOL * (1.0 + np.abs(lower))
    at_upper = upper - x <= BOUND_TOL * (1.0 + np.abs(upper))
    frozen = np.zeros(x.size, dtype=bool)
    outcome = _solve(scaled, normalizers, dual)
    while True:
        pushing = ~frozen & ((at_lower & (outcome.d < 0)) | (at_upper & (outcome.d > 0)))
        if not pushing.any():
            return outcome
        frozen |= pushing
        restricted = scaled.copy()
        restricted[:, frozen] = 0.0
        outcome = _solve(restricted, normalizers, dual,
                         tuple(int(j) for j in np.flatnonzero(frozen)))
        logger.debug("Froze coordinates %s on the box boundary", outcome.frozen)


def is_pareto_critical(outcome: DirectionOutcome, eps: float) -> bool:
    """
    Criticality test |theta| < eps.

    Raises:
        ConfigurationError: If eps is not positive
    """
    if not eps > 0:
        raise ConfigurationError(f"Eps must be positive, got {eps}")
    return abs(outcome.theta) < eps
