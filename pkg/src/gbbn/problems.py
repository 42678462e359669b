"""
Box-constrained multiobjective test problems with analytic Jacobians.

Every problem is a ProblemInstance holding vectorized objective and Jacobian callables,
its box, the recommended normalization constant eta and, for quadratic problems, the
constant Hessians of each objective. The suite is built once and shared read-only.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigvalsh

from .interfaces import BenchmarkError, DimensionMismatch, NonFiniteValue

logger = logging.getLogger(__name__)

#: Start points and gradient-check points keep this distance from singular sets.
SINGULAR_MARGIN = 0.05

#: Share of the distance to a singular set that a single step may cover.
SINGULAR_STEP_FRACTION = 0.9

Vector = np.ndarray
Matrix = np.ndarray


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """A vector objective f: R^n -> R^m on a box, with its analytic Jacobian."""
    name: str
    n: int
    m: int
    lower: Vector
    upper: Vector
    eta_default: float
    evaluate: Callable[[Vector], Vector]
    jacobian: Callable[[Vector], Matrix]
    reference: str = ""
    singular_distance: Optional[Callable[[Vector], float]] = None
    singular_crossing: Optional[Callable[[Vector, Vector], float]] = None
    hessians: Optional[Tuple[Matrix, ...]] = None

    def __post_init__(self):
        lower = np.array(np.broadcast_to(np.asarray(self.lower, dtype=float), (self.n,)))
        upper = np.array(np.broadcast_to(np.asarray(self.upper, dtype=float), (self.n,)))
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, 'lower', lower)
        object.__setattr__(self, 'upper', upper)
        self.validate()

    def validate(self) -> None:
        """
        Validate dimensions and bounds.

        Raises:
            DimensionMismatch: If dimensions or bounds are inconsistent
        """
        if self.n < 1 or self.m < 1:
            raise DimensionMismatch(f"{self.name}: n and m must be positive")

        if not np.all(self.lower < self.upper):
            raise DimensionMismatch(f"{self.name}: lower bounds must be below upper bounds")

        if not self.eta_default > 0:
            raise DimensionMismatch(f"{self.name}: eta_default must be positive")

        if self.hessians is not None:
            if len(self.hessians) != self.m:
                raise DimensionMismatch(f"{self.name}: one Hessian per objective is required")
            for hessian in self.hessians:
                if np.shape(hessian) != (self.n, self.n):
                    raise DimensionMismatch(f"{self.name}: Hessians must be {self.n}x{self.n}")

    def contains(self, x: Sequence[float], slack: float = 0.0) -> bool:
        """Whether x lies in the box, allowing the given slack."""
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - slack) and np.all(x <= self.upper + slack))

    def is_singular_near(self, x: Vector, margin: float = SINGULAR_MARGIN) -> bool:
        """Whether x lies within margin of a declared singular set."""
        if self.singular_distance is None:
            return False
        return self.singular_distance(x) < margin

    def regular_step(self, x: Vector, d: Vector) -> float:
        """
        Largest step along d that stays clear of the singular set.

        A step may cover SINGULAR_STEP_FRACTION of the distance to the first crossing;
        inf when nothing is declared or d never reaches the set.
        """
        if self.singular_crossing is None:
            return math.inf
        return SINGULAR_STEP_FRACTION * self.singular_crossing(np.asarray(x, dtype=float),
                                                               np.asarray(d, dtype=float))

    def describe(self) -> Dict[str, object]:
        """Summary used by the problem listing."""
        return {
            'name': self.name,
            'n': self.n,
            'm': self.m,
            'lower': float(self.lower[0]) if np.all(self.lower == self.lower[0]) else self.lower.tolist(),
            'upper': float(self.upper[0]) if np.all(self.upper == self.upper[0]) else self.upper.tolist(),
            'eta': self.eta_default,
            'reference': self.reference,
        }


def _imbalance(name: str, a: float, b: float, c: float, d: float) -> ProblemInstance:
    def evaluate(x):
        return np.array([
            a * x[0] ** 2 + b * x[1] ** 2,
            c * (x[0] - 50.0) ** 2 + d * (x[1] + 50.0) ** 2,
        ])

    def jacobian(x):
        return np.array([
            [2.0 * a * x[0], 2.0 * b * x[1]],
            [2.0 * c * (x[0] - 50.0), 2.0 * d * (x[1] + 50.0)],
        ])

    return ProblemInstance(
        name=name, n=2, m=2, lower=-2.0, upper=2.0, eta_default=40.0,
        evaluate=evaluate, jacobian=jacobian,
        reference="Imbalanced quadratics",
        hessians=(np.diag([2.0 * a, 2.0 * b]), np.diag([2.0 * c, 2.0 * d])),
    )


def _jos1(name: str, n: int) -> ProblemInstance:
    def evaluate(x):
        return np.array([np.mean(x ** 2), np.mean((x - 2.0) ** 2)])

    def jacobian(x):
        return np.vstack([2.0 * x / n, 2.0 * (x - 2.0) / n])

    hessian = 2.0 / n * np.eye(n)
    return ProblemInstance(
        name=name, n=n, m=2, lower=-2.0, upper=2.0, eta_default=3.0,
        evaluate=evaluate, jacobian=jacobian,
        reference="Jin, Olhofer, Sendhoff (2001)",
        hessians=(hessian, hessian.copy()),
    )


def _wit(name: str, lam: float) -> ProblemInstance:
    def evaluate(x):
        u, v = x[0] - 2.0, x[1] - 2.0
        f1 = lam * (u ** 2 + v ** 2) + (1.0 - lam) * (u ** 4 + v ** 8)
        f2 = (x[0] + 2.0 * lam) ** 2 + (x[1] + 2.0 * lam) ** 2
        return np.array([f1, f2])

    def jacobian(x):
        u, v = x[0] - 2.0, x[1] - 2.0
        return np.array([
            [2.0 * lam * u + 4.0 * (1.0 - lam) * u ** 3,
             2.0 * lam * v + 8.0 * (1.0 - lam) * v ** 7],
            [2.0 * (x[0] + 2.0 * lam), 2.0 * (x[1] + 2.0 * lam)],
        ])

    hessians = None
    if lam == 1.0:
        hessians = (2.0 * np.eye(2), 2.0 * np.eye(2))
    return ProblemInstance(
        name=name, n=2, m=2, lower=-2.0, upper=2.0, eta_default=40.0,
        evaluate=evaluate, jacobian=jacobian,
        reference=f"Witting (2012), lambda = {lam}",
        hessians=hessians,
    )


def _deb_g(x2):
    e1 = np.exp(-((x2 - 0.2) / 0.004) ** 2)
    e2 = np.exp(-((x2 - 0.6) / 0.4) ** 2)
    g = 2.0 - e1 - 0.8 * e2
    dg = 2.0 * (x2 - 0.2) / 0.004 ** 2 * e1 + 1.6 * (x2 - 0.6) / 0.4 ** 2 * e2
    return g, dg


def _deb() -> ProblemInstance:
    def evaluate(x):
        g, _ = _deb_g(x[1])
        with np.errstate(divide='ignore', invalid='ignore'):
            return np.array([x[0], g / x[0]])

    def jacobian(x):
        g, dg = _deb_g(x[1])
        with np.errstate(divide='ignore', invalid='ignore'):
            return np.array([
                [1.0, 0.0],
                [-g / x[0] ** 2, dg / x[0]],
            ])

    return ProblemInstance(
        name="Deb", n=2, m=2, lower=0.1, upper=1.0, eta_default=3.0,
        evaluate=evaluate, jacobian=jacobian,
        reference="Deb (1999), bimodal g",
        singular_distance=lambda x: float(abs(x[0])),
    )


def _pnr() -> ProblemInstance:
    def evaluate(x):
        x1, x2 = x[0], x[1]
        f1 = x1 ** 4 + x2 ** 4 - x1 ** 2 + x2 ** 2 - 10.0 * x1 * x2 + 0.25 * x1 + 20.0
        f2 = (x1 - 1.0) ** 2 + x2 ** 2
        return np.array([f1, f2])

    def jacobian(x):
        x1, x2 = x[0], x[1]
        return np.array([
            [4.0 * x1 ** 3 - 2.0 * x1 - 10.0 * x2 + 0.25, 4.0 * x2 ** 3 + 2.0 * x2 - 10.0 * x1],
            [2.0 * (x1 - 1.0), 2.0 * x2],
        ])

    return ProblemInstance(
        name="PNR", n=2, m=2, lower=-2.0, upper=2.0, eta_default=40.0,
        evaluate=evaluate, jacobian=jacobian,
        reference="Preuss, Naujoks, Rudolph (2006)",
    )


def _dd1(name: str, bound: float) -> ProblemInstance:
    def evaluate(x):
        f1 = float(x @ x)
        f2 = 3.0 * x[0] + 2.0 * x[1] - x[2] / 3.0 + 0.01 * (x[3] - x[4]) ** 3
        return np.array([f1, f2])

    def jacobian(x):
        w = 0.03 * (x[3] - x[4]) ** 2
        return np.vstack([2.0 * x, [3.0, 2.0, -1.0 / 3.0, w, -w]])

    return ProblemInstance(
        name=name, n=5, m=2, lower=-bound, upper=bound, eta_default=3.0,
        evaluate=evaluate, jacobian=jacobian,
        reference="Das, Dennis (1998)",
    )


def _tridia1() -> ProblemInstance:
    def evaluate(x):
        return np.array([
            (2.0 * x[0] - 1.0) ** 2,
            2.0 * (2.0 * x[0] - x[1]) ** 2,
            3.0 * (x[1] - x[2]) ** 2,
        ])

    def jacobian(x):
        r1 = 2.0 * x[0] - 1.0
        r2 = 2.0 * x[0] - x[1]
        r3 = x[1] - x[2]
        return np.array([
            [4.0 * r1, 0.0, 0.0],
            [8.0 * r2, -4.0 * r2, 0.0],
            [0.0, 6.0 * r3, -6.0 * r3],
        ])

    hessians = (
        np.array([[8.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]),
        np.array([[16.0, -8.0, 0.0], [-8.0, 4.0, 0.0], [0.0, 0.0, 0.0]]),
        np.array([[0.0, 0.0, 0.0], [0.0, 6.0, -6.0], [0.0, -6.0, 6.0]]),
    )
    return ProblemInstance(
        name="TRIDIA1", n=3, m=3, lower=-1.0, upper=1.0, eta_default=40.0,
        evaluate=evaluate, jacobian=jacobian,
        reference="Morovati, Pourkarimi (2019)",
        hessians=hessians,
    )


def _tridia2() -> ProblemInstance:
    # f_i for i = 2, 3 read i(2x_{i-1} - x_i)^2 - (i-1)x_{i-1}^2 + i x_i^2
    def evaluate(x):
        f1 = (2.0 * x[0] - 1.0) ** 2 + x[1] ** 2
        f2 = 2.0 * (2.0 * x[0] - x[1]) ** 2 - x[0] ** 2 + 2.0 * x[1] ** 2
        f3 = 3.0 * (2.0 * x[1] - x[2]) ** 2 - 2.0 * x[1] ** 2 + 3.0 * x[2] ** 2
        f4 = 4.0 * (2.0 * x[2] - x[3]) ** 2 - 3.0 * x[2] ** 2
        return np.array([f1, f2, f3, f4])

    def jacobian(x):
        r2 = 2.0 * x[0] - x[1]
        r3 = 2.0 * x[1] - x[2]
        r4 = 2.0 * x[2] - x[3]
        return np.array([
            [4.0 * (2.0 * x[0] - 1.0), 2.0 * x[1], 0.0, 0.0],
            [8.0 * r2 - 2.0 * x[0], -4.0 * r2 + 4.0 * x[1], 0.0, 0.0],
            [0.0, 12.0 * r3 - 4.0 * x[1], -6.0 * r3 + 6.0 * x[2], 0.0],
            [0.0, 0.0, 16.0 * r4 - 6.0 * x[2], -8.0 * r4],
        ])

    hessians = (
        np.diag([8.0, 2.0, 0.0, 0.0]),
        np.array([[14.0, -8.0, 0.0, 0.0], [-8.0, 8.0, 0.0, 0.0],
                  [0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]]),
        np.array([[0.0, 0.0, 0.0, 0.0], [0.0, 20.0, -12.0, 0.0],
                  [0.0, -12.0, 12.0, 0.0], [0.0, 0.0, 0.0, 0.0]]),
        np.array([[0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0],
                  [0.0, 0.0, 26.0, -16.0], [0.0, 0.0, -16.0, 8.0]]),
    )
    return ProblemInstance(
        name="TRIDIA2", n=4, m=4, lower=-1.0, upper=1.0, eta_default=40.0,
        evaluate=evaluate, jacobian=jacobian,
        reference="Morovati, Pourkarimi (2019)",
        hessians=hessians,
    )


def _ltdz() -> ProblemInstance:
    k = math.pi / 2.0

    # minimized as printed
    def evaluate(x):
        p = 1.0 + x[2]
        c1, s1 = np.cos(k * x[0]), np.sin(k * x[0])
        c2, s2 = np.cos(k * x[1]), np.sin(k * x[1])
        return np.array([3.0 - p * c1 * c2, 3.0 - p * c1 * s2, 3.0 - p * c1 * s1])

    def jacobian(x):
        p = 1.0 + x[2]
        c1, s1 = np.cos(k * x[0]), np.sin(k * x[0])
        c2, s2 = np.cos(k * x[1]), np.sin(k * x[1])
        return np.array([
            [p * k * s1 * c2, p * k * c1 * s2, -c1 * c2],
            [p * k * s1 * s2, -p * k * c1 * c2, -c1 * s2],
            [-p * k * (c1 ** 2 - s1 ** 2), 0.0, -c1 * s1],
        ])

    return ProblemInstance(
        name="LTDZ", n=3, m=3, lower=0.0, upper=1.0, eta_default=40.0,
        evaluate=evaluate, jacobian=jacobian,
        reference="Laumanns, Thiele, Deb, Zitzler (2002)",
    )


def _hil() -> ProblemInstance:
    a_c, a_1, a_2, d = 45.0, 40.0, 25.0, 0.5
    two_pi = 2.0 * math.pi
    deg = two_pi / 360.0

    def evaluate(x):
        a = deg * (a_c + a_1 * np.sin(two_pi * x[0]) + a_2 * np.sin(two_pi * x[1]))
        b = 1.0 + d * np.cos(two_pi * x[0])
        return np.array([b * np.cos(a), b * np.sin(a)])

    def jacobian(x):
        a = deg * (a_c + a_1 * np.sin(two_pi * x[0]) + a_2 * np.sin(two_pi * x[1]))
        b = 1.0 + d * np.cos(two_pi * x[0])
        da = np.array([deg * a_1 * two_pi * np.cos(two_pi * x[0]),
                       deg * a_2 * two_pi * np.cos(two_pi * x[1])])
        db = np.array([-d * two_pi * np.sin(two_pi * x[0]), 0.0])
        return np.vstack([
            db * np.cos(a) - b * np.sin(a) * da,
            db * np.sin(a) + b * np.cos(a) * da,
        ])

    return ProblemInstance(
        name="Hil", n=2, m=2, lower=0.0, upper=5.0, eta_default=40.0,
        evaluate=evaluate, jacobian=jacobian,
        reference="Hillermeier (2001)",
    )


def _sd() -> ProblemInstance:
    root2 = math.sqrt(2.0)
    linear = np.array([2.0, root2, root2, 1.0])
    inverse = np.array([2.0, 2.0 * root2, 2.0 * root2, 2.0])

    def evaluate(x):
        with np.errstate(divide='ignore', invalid='ignore'):
            return np.array([float(linear @ x), float(np.sum(inverse / x))])

    def jacobian(x):
        with np.errstate(divide='ignore', invalid='ignore'):
            return np.vstack([linear, -inverse / x ** 2])

    def crossing(x, d):
        toward = x * d < 0
        if not toward.any():
            return math.inf
        return float(np.min(-x[toward] / d[toward]))

    return ProblemInstance(
        name="SD", n=4, m=2, lower=-2.0, upper=2.0, eta_default=40.0,
        evaluate=evaluate, jacobian=jacobian,
        reference="Stadler, Dauer (1992), four-bar truss",
        singular_distance=lambda x: float(np.min(np.abs(x))),
        singular_crossing=crossing,
    )


@lru_cache(maxsize=1)
def _build_suite() -> Tuple[ProblemInstance, ...]:
    problems = [
        _imbalance("Imbalance1", 0.1, 10.0, 1.0, 100.0),
        _imbalance("Imbalance2", 1.0, 1.0, 100.0, 100.0),
        _jos1("JOS1a", 50),
        _jos1("JOS1b", 100),
        _jos1("JOS1c", 200),
        _jos1("JOS1d", 500),
    ]
    for index, lam in enumerate((0.0, 0.5, 0.9, 0.99, 0.999, 1.0), start=1):
        problems.append(_wit(f"WIT{index}", lam))
    problems.extend([
        _deb(),
        _pnr(),
        _dd1("DD1c", 10.0),
        _dd1("DD1d", 20.0),
        _tridia1(),
        _tridia2(),
        _ltdz(),
        _hil(),
        _sd(),
    ])
    logger.debug("Built problem suite with %d instances", len(problems))
    return tuple(problems)


def suite() -> List[ProblemInstance]:
    """
    Get the full test suite in its canonical order.

    Returns:
        List of the 21 problem instances (shared, immutable)
    """
    return list(_build_suite())


def problem_names() -> List[str]:
    """Names of the suite problems in canonical order."""
    return [problem.name for problem in _build_suite()]


def get_problem(name: str) -> ProblemInstance:
    """
    Look up a suite problem by name, ignoring case.

    Args:
        name: Problem name such as "JOS1a"

    Returns:
        The matching ProblemInstance

    Raises:
        BenchmarkError: If no problem has that name
    """
    for problem in _build_suite():
        if problem.name.lower() == name.lower():
            return problem
    raise BenchmarkError(f"Unknown problem: {name}")


def _checked_point(p: ProblemInstance, x: Sequence[float]) -> Vector:
    x = np.asarray(x, dtype=float)
    if x.shape != (p.n,):
        raise DimensionMismatch(f"{p.name}: expected a point of length {p.n}, got shape {x.shape}")
    return x


def eval_objectives(p: ProblemInstance, x: Sequence[float]) -> Vector:
    """
    Evaluate f(x) only.

    Raises:
        DimensionMismatch: If x has the wrong length
        NonFiniteValue: If some component is NaN or infinite
    """
    x = _checked_point(p, x)
    f = np.asarray(p.evaluate(x), dtype=float)
    if not np.all(np.isfinite(f)):
        raise NonFiniteValue(f"{p.name}: non-finite objective value at {x.tolist()}", p.name, x)
    return f


def eval_jacobian(p: ProblemInstance, x: Sequence[float]) -> Matrix:
    """
    Evaluate Jf(x) only.

    Raises:
        DimensionMismatch: If x has the wrong length
        NonFiniteValue: If some entry is NaN or infinite
    """
    x = _checked_point(p, x)
    J = np.asarray(p.jacobian(x), dtype=float)
    if J.shape != (p.m, p.n):
        raise DimensionMismatch(f"{p.name}: Jacobian has shape {J.shape}, expected {(p.m, p.n)}")
    if not np.all(np.isfinite(J)):
        raise NonFiniteValue(f"{p.name}: non-finite Jacobian at {x.tolist()}", p.name, x)
    return J


def eval_pair(p: ProblemInstance, x: Sequence[float]) -> Tuple[Vector, Matrix]:
    """
    Evaluate objectives and Jacobian together.

    Args:
        p: Problem instance
        x: Point of length p.n

    Returns:
        Tuple (f, J) with f of length m and J of shape (m, n)

    Raises:
        DimensionMismatch: If x has the wrong length
        NonFiniteValue: If f or J contains NaN or infinity
    """
    return eval_objectives(p, x), eval_jacobian(p, x)


def finite_difference_jacobian(p: ProblemInstance, x: Sequence[float]) -> Matrix:
    """Central-difference Jacobian with per-coordinate step 1e-6 (1 + |x_j|)."""
    x = _checked_point(p, x)
    J = np.empty((p.m, p.n))
    for j in range(p.n):
        h = 1e-6 * (1.0 + abs(x[j]))
        step = np.zeros(p.n)
        step[j] = h
        forward = np.asarray(p.evaluate(x + step), dtype=float)
        backward = np.asarray(p.evaluate(x - step), dtype=float)
        J[:, j] = (forward - backward) / (2.0 * h)
    return J


def gradient_error(p: ProblemInstance, x: Sequence[float]) -> float:
    """Relative error max|J_fd - J| / max(1, max|J|) at one point."""
    _, J = eval_pair(p, x)
    J_fd = finite_difference_jacobian(p, x)
    if not np.all(np.isfinite(J_fd)):
        raise NonFiniteValue(f"{p.name}: non-finite difference quotient near {list(x)}", p.name, x)
    return float(np.max(np.abs(J_fd - J)) / max(1.0, float(np.max(np.abs(J)))))


def check_gradients(p: ProblemInstance, trials: int, seed: int) -> float:
    """
    Compare analytic and central-difference Jacobians at random interior points.

    Args:
        p: Problem instance
        trials: Number of sample points
        seed: Seed of the sampling generator

    Returns:
        Worst relative error over the sampled points

    Raises:
        ValueError: If trials < 1
        NonFiniteValue: If an evaluation is not finite
    """
    if trials < 1:
        raise ValueError("Gradient check needs at least one trial")

    rng = np.random.Generator(np.random.PCG64(seed))
    worst = 0.0
    checked = 0
    while checked < trials:
        x = rng.uniform(p.lower, p.upper)
        if p.is_singular_near(x):
            continue
        worst = max(worst, gradient_error(p, x))
        checked += 1
    logger.debug("%s: worst gradient error %.3e over %d points", p.name, worst, trials)
    return worst


def lipschitz_constant(p: ProblemInstance) -> Optional[float]:
    """
    Largest Hessian eigenvalue magnitude over the objectives of a quadratic problem.

    Returns:
        L_max, or None when the problem has no constant Hessians
    """
    if p.hessians is None:
        return None
    return max(float(np.max(np.abs(eigvalsh(hessian)))) for hessian in p.hessians)
