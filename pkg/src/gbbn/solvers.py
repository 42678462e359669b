"""
Descent loops for multiobjective minimization on a box.

SteepestDescentSolver is the monotone steepest descent method with Armijo steps.
GlobalBBSolver and GBBNSolver accept Barzilai-Borwein trial steps through the
max-type nonmonotone line search; GBBNSolver computes its direction from
normalized gradients. Solvers are registered in SolverFactory by name.
"""

import logging
import time
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Type

import numpy as np

from .config import InitialStepRule, SecantRule, SolverConfig
from .direction import face_direction, is_pareto_critical, normalized_direction, steepest_direction
from .interfaces import (
    BacktrackLimitExceeded,
    BenchmarkError,
    DescentSolver,
    DimensionMismatch,
    NonFiniteValue,
    ZeroGradientError,
)
from .linesearch import NonmonotoneMemory, armijo, cap_to_box, nonmonotone_search, step_limit
from .models import DirectionOutcome, IterationLog, RunRecord, TerminationReason, ValidationError
from .problems import ProblemInstance, eval_jacobian, eval_objectives

logger = logging.getLogger(__name__)

BOX_SLACK = 1e-12


class BBSteps(NamedTuple):
    """Barzilai-Borwein step candidates; None marks a degenerate quotient."""
    bb1: Optional[float]
    bb2: Optional[float]
    bb3: Optional[float]


def bb_steps(s, v) -> BBSteps:
    """
    Long, short and geometric-mean BB steps from a secant pair.

    bb1 = <s,s>/<s,v>, bb2 = <s,v>/<v,v>, bb3 = ||s||/||v||. Negative values are
    returned as they are.
    """
    s = np.asarray(s, dtype=float)
    v = np.asarray(v, dtype=float)
    ss = float(s @ s)
    sv = float(s @ v)
    vv = float(v @ v)
    bb1 = ss / sv if sv != 0 else None
    bb2 = sv / vv if vv != 0 else None
    bb3 = float(np.sqrt(ss) / np.sqrt(vv)) if vv != 0 else None
    return BBSteps(bb1, bb2, bb3)


def clamp_initial_step(bb1: Optional[float], bb3: Optional[float], cfg: SolverConfig) -> float:
    """max(alpha_min, min(bb1, bb3, alpha_max)) over the present values, 1 if both are absent."""
    present = [value for value in (bb1, bb3) if value is not None]
    if not present:
        return 1.0
    return max(cfg.alpha_min, min(present + [cfg.alpha_max]))


def safeguarded_initial_step(s, v, cfg: SolverConfig) -> float:
    """
    Clamped BB step of a secant pair.

    BB1 enters only when <s,v> > 0; otherwise BB3 is clamped alone.
    """
    steps = bb_steps(s, v)
    bb1 = steps.bb1 if steps.bb1 is not None and steps.bb1 > 0 else None
    return clamp_initial_step(bb1, steps.bb3, cfg)


@dataclass
class BBState:
    """Secant data carried from one iteration to the next."""
    x_prev: Optional[np.ndarray] = None
    jacobian_prev: Optional[np.ndarray] = None
    d_prev: Optional[np.ndarray] = None
    first_iter: bool = True

    def advance(self, x: np.ndarray, J: np.ndarray, d: np.ndarray) -> None:
        self.x_prev = x
        self.jacobian_prev = J
        self.d_prev = d
        self.first_iter = False


def secant_difference(rule: SecantRule, J_old: np.ndarray, J_new: np.ndarray,
                      d_old: np.ndarray, d_new: np.ndarray,
                      current: DirectionOutcome) -> np.ndarray:
    """
    Gradient-change vector v of a secant pair.

    WEIGHTED combines the raw gradient differences with the weights and normalizers of
    the current iterate held fixed; DIRECTION is d_old - d_new; LITERAL is d_new - d_old.
    """
    if rule is SecantRule.WEIGHTED:
        coefficients = current.weights.lam / current.normalizers
        return coefficients @ (J_new - J_old)
    if rule is SecantRule.DIRECTION:
        return d_old - d_new
    return d_new - d_old


def effective_secant_rule(rule: SecantRule, eta: Optional[float]) -> SecantRule:
    """
    Secant rule actually used for a normalization constant.

    Under plain normalization (eta = 0) the normalizers move with the gradients,
    so WEIGHTED falls back to DIRECTION.
    """
    if rule is SecantRule.WEIGHTED and eta == 0:
        return SecantRule.DIRECTION
    return rule


def _direction_at(problem: ProblemInstance, x: np.ndarray, J: np.ndarray,
                  eta: Optional[float], cfg: SolverConfig) -> DirectionOutcome:
    if cfg.respect_box:
        return face_direction(J, x, problem.lower, problem.upper, eta=eta, dual=cfg.dual)
    if eta is None:
        return steepest_direction(J, cfg.dual)
    return normalized_direction(J, eta, cfg.dual)


class _DescentLoop(DescentSolver):
    """Shared iteration: direction, criticality test, trial step, line search."""

    nonmonotone = True
    uses_bb_steps = True

    def _eta(self, problem: ProblemInstance, cfg: SolverConfig) -> Optional[float]:
        return None

    def _direction(self, problem: ProblemInstance, x: np.ndarray, J: np.ndarray,
                   eta: Optional[float], cfg: SolverConfig) -> DirectionOutcome:
        return _direction_at(problem, x, J, eta, cfg)

    def _lookahead_step(self, problem: ProblemInstance, x: np.ndarray, J: np.ndarray,
                        out: DirectionOutcome, eta: Optional[float], cfg: SolverConfig):
        """BB step at k = 0 from the secant pair (x, x + tau d); returns (alpha, jacobian evaluations)."""
        tau = step_limit(problem, x, out.d, 1.0)
        if tau <= 0:
            return 1.0, 0
        x_ahead = np.clip(x + tau * out.d, problem.lower, problem.upper)
        with np.errstate(all='ignore'):
            J_ahead = np.asarray(problem.jacobian(x_ahead), dtype=float)
        if not np.all(np.isfinite(J_ahead)):
            return 1.0, 1
        rule = effective_secant_rule(cfg.secant, eta)
        d_ahead = out.d
        if rule is not SecantRule.WEIGHTED:
            try:
                d_ahead = self._direction(problem, x_ahead, J_ahead, eta, cfg).d
            except ZeroGradientError:
                return 1.0, 1
        v = secant_difference(rule, J, J_ahead, out.d, d_ahead, current=out)
        return safeguarded_initial_step(x_ahead - x, v, cfg), 1

    def _initial_step(self, problem: ProblemInstance, x: np.ndarray, J: np.ndarray,
                      out: DirectionOutcome, state: BBState, eta: Optional[float],
                      cfg: SolverConfig):
        if not self.uses_bb_steps or cfg.initial_step is InitialStepRule.UNIT:
            return 1.0, 0
        if state.first_iter:
            if cfg.initial_step is InitialStepRule.UNIT_START:
                return 1.0, 0
            return self._lookahead_step(problem, x, J, out, eta, cfg)
        rule = effective_secant_rule(cfg.secant, eta)
        v = secant_difference(rule, state.jacobian_prev, J, state.d_prev, out.d, current=out)
        return safeguarded_initial_step(x - state.x_prev, v, cfg), 0

    def solve(self, problem: ProblemInstance, x0: Sequence[float],
              config: Optional[SolverConfig] = None) -> RunRecord:
        cfg = config or SolverConfig()
        x = np.array(x0, dtype=float)
        if x.shape != (problem.n,):
            raise DimensionMismatch(f"{problem.name}: start point must have length {problem.n}")
        if not problem.contains(x, BOX_SLACK):
            raise ValidationError(f"{problem.name}: start point lies outside the box")
        x = np.clip(x, problem.lower, problem.upper)
        eta = self._eta(problem, cfg)

        started = time.perf_counter()
        f = eval_objectives(problem, x)
        fevals, jevals = 1, 0
        memory = NonmonotoneMemory(cfg.ls.memory_M)
        memory.push(f)
        state = BBState()

        accepted: List[float] = []
        initial: List[float] = []
        backtracks: List[int] = []
        thetas: List[float] = []
        trace: List[IterationLog] = []
        detail = ""
        k = 0

        while True:
            try:
                J = eval_jacobian(problem, x)
            except NonFiniteValue as exc:
                if k == 0:
                    raise
                reason, detail = TerminationReason.BACKTRACK_FAIL, str(exc)
                logger.warning("%s/%s: %s", problem.name, self.name, exc)
                break
            jevals += 1
            try:
                out = self._direction(problem, x, J, eta, cfg)
            except ZeroGradientError as exc:
                thetas.append(0.0)
                reason, detail = TerminationReason.THETA_SMALL, str(exc)
                break
            thetas.append(out.theta)

            if is_pareto_critical(out, cfg.eps):
                reason = TerminationReason.THETA_SMALL
                break
            if k >= cfg.max_iter:
                reason = TerminationReason.MAX_ITER
                break

            alpha0, extra_jevals = self._initial_step(problem, x, J, out, state, eta, cfg)
            jevals += extra_jevals
            if cap_to_box(x, out.d, alpha0, problem.lower, problem.upper) <= 0:
                reason, detail = TerminationReason.BACKTRACK_FAIL, "direction blocked by the box"
                break

            reference = memory.reference if self.nonmonotone else f
            try:
                if self.nonmonotone:
                    alpha, x_new, f_new, trials = nonmonotone_search(
                        problem, x, out.d, J, memory, alpha0, cfg.ls)
                else:
                    alpha, x_new, f_new, trials = armijo(problem, x, out.d, J, f, cfg.ls, alpha0)
            except BacktrackLimitExceeded as exc:
                fevals += exc.trials
                reason, detail = TerminationReason.BACKTRACK_FAIL, str(exc)
                logger.warning("%s/%s: %s", problem.name, self.name, exc)
                break

            fevals += trials
            accepted.append(alpha)
            initial.append(alpha0)
            backtracks.append(trials - 1)
            if cfg.record_trace:
                trace.append(IterationLog(
                    k=k, x=x, f=f, reference=np.array(reference), jd=J @ out.d,
                    theta=out.theta, alpha0=alpha0, alpha=alpha, trials=trials,
                    frozen=out.frozen,
                ))
            logger.debug("%s/%s k=%d theta=%.3e alpha0=%.4g alpha=%.4g trials=%d",
                         problem.name, self.name, k, out.theta, alpha0, alpha, trials)

            state.advance(x, J, out.d)
            x, f = x_new, f_new
            k += 1

        elapsed = time.perf_counter() - started
        if reason is TerminationReason.MAX_ITER:
            logger.info("%s/%s stopped at the iteration cap with |theta| = %.3e",
                        problem.name, self.name, abs(thetas[-1]))
        return RunRecord(
            problem=problem.name,
            algorithm=self.name,
            iterations=k,
            fevals=fevals,
            jevals=jevals,
            accepted_steps=accepted,
            initial_steps=initial,
            backtracks=backtracks,
            theta_trace=thetas,
            x_final=x,
            f_final=f,
            terminated_by=reason,
            wall_time=elapsed,
            eta=eta,
            detail=detail,
            trace=trace,
        )


class SteepestDescentSolver(_DescentLoop):
    """Steepest descent with monotone Armijo steps from alpha = 1."""

    name = "sdmo"
    nonmonotone = False
    uses_bb_steps = False

    def get_description(self) -> str:
        return "Multiobjective steepest descent, Armijo line search"


class GlobalBBSolver(_DescentLoop):
    """Global BB method on the raw gradients."""

    name = "gbb"

    def get_description(self) -> str:
        return "Global Barzilai-Borwein method, max-type nonmonotone line search"


class GBBNSolver(_DescentLoop):
    """Global BB method on gradients normalized by ||g_i|| + eta."""

    name = "gbbn"

    @property
    def uses_normalization(self) -> bool:
        return True

    def _eta(self, problem: ProblemInstance, cfg: SolverConfig) -> Optional[float]:
        return problem.eta_default if cfg.eta is None else cfg.eta

    def get_description(self) -> str:
        return "Global Barzilai-Borwein method with gradient normalization"


class SolverFactory:
    """Registry of descent solvers by name."""

    _solvers: Dict[str, Type[DescentSolver]] = {}

    @classmethod
    def register_solver(cls, solver_class: Type[DescentSolver]) -> None:
        """Register a solver class under its name."""
        cls._solvers[solver_class.name] = solver_class

    @classmethod
    def create_solver(cls, name: str) -> DescentSolver:
        """
        Create a solver by name.

        Raises:
            BenchmarkError: If no solver is registered under that name
        """
        key = name.lower()
        if key not in cls._solvers:
            raise BenchmarkError(f"Unknown algorithm: {name}")
        return cls._solvers[key]()

    @classmethod
    def available_algorithms(cls) -> List[str]:
        """Registered solver names."""
        return list(cls._solvers.keys())


for _solver_class in (SteepestDescentSolver, GlobalBBSolver, GBBNSolver):
    SolverFactory.register_solver(_solver_class)


def solve_sdmo(p: ProblemInstance, x0, cfg: Optional[SolverConfig] = None) -> RunRecord:
    """Run steepest descent from x0."""
    return SteepestDescentSolver().solve(p, x0, cfg)


def solve_gbb(p: ProblemInstance, x0, cfg: Optional[SolverConfig] = None) -> RunRecord:
    """Run the global BB method on raw gradients from x0."""
    return GlobalBBSolver().solve(p, x0, cfg)


def solve_gbbn(p: ProblemInstance, x0, cfg: Optional[SolverConfig] = None) -> RunRecord:
    """Run the normalized global BB method from x0."""
    return GBBNSolver().solve(p, x0, cfg)


def pareto_critical_residual(p: ProblemInstance, x, cfg: Optional[SolverConfig] = None) -> float:
    """
    |theta(x)| of the unnormalized steepest descent subproblem at x.

    Raises:
        NonFiniteValue: If the Jacobian is not finite at x
    """
    cfg = cfg or SolverConfig()
    x = np.asarray(x, dtype=float)
    J = eval_jacobian(p, x)
    return abs(_direction_at(p, x, J, None, cfg).theta)
