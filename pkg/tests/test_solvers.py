"""
Tests for the descent solvers.
"""

import sys
import os
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

import numpy as np
import pytest
from gbbn.solvers import (
    bb_steps, clamp_initial_step, safeguarded_initial_step, secant_difference, effective_secant_rule,
    SteepestDescentSolver, GlobalBBSolver,
    GBBNSolver, SolverFactory, solve_sdmo, solve_gbb, solve_gbbn, pareto_critical_residual
)
from gbbn.benchmark import sample_starts
from gbbn.config import SolverConfig, LineSearchConfig, InitialStepRule, SecantRule
from gbbn.direction import steepest_direction
from gbbn.interfaces import BenchmarkError, DescentSolver, DimensionMismatch
from gbbn.models import TerminationReason, ValidationError
from gbbn.problems import ProblemInstance, eval_jacobian, get_problem, lipschitz_constant


@pytest.fixture
def half_square():
    """f(x) = ||x||^2 / 2 on [-10, 10]^2."""
    return ProblemInstance(
        name="half_square", n=2, m=1, lower=-10.0, upper=10.0, eta_default=1.0,
        evaluate=lambda x: np.array([0.5 * float(x @ x)]),
        jacobian=lambda x: np.array([x.copy()]),
    )


class TestBBSteps:
    """Test Barzilai-Borwein step candidates."""

    def test_collinear(self):
        """Test collinear s and v."""
        steps = bb_steps([1.0, 0.0], [0.5, 0.0])
        assert steps.bb1 == pytest.approx(2.0)
        assert steps.bb2 == pytest.approx(2.0)
        assert steps.bb3 == pytest.approx(2.0)

    def test_general_pair(self):
        """Test a non-collinear pair."""
        steps = bb_steps([1.0, 1.0], [2.0, 0.0])
        assert steps.bb1 == pytest.approx(1.0)
        assert steps.bb2 == pytest.approx(0.5)
        assert steps.bb3 == pytest.approx(0.70711, abs=1e-5)

    def test_negative_curvature(self):
        """Test a negative quotient is returned before clamping."""
        steps = bb_steps([1.0, 0.0], [-1.0, 0.0])
        assert steps.bb1 == pytest.approx(-1.0)
        assert steps.bb3 == pytest.approx(1.0)

    def test_degenerate(self):
        """Test a zero v leaves the quotients absent."""
        steps = bb_steps([1.0, 0.0], [0.0, 0.0])
        assert steps.bb1 is None
        assert steps.bb2 is None
        assert steps.bb3 is None


class TestClampInitialStep:
    """Test the safeguarded initial step."""

    def test_inside_bounds(self):
        """Test a step inside the bounds is kept."""
        assert clamp_initial_step(2.0, 2.0, SolverConfig()) == 2.0

    def test_negative_clamps_to_floor(self):
        """Test a negative BB1 clamps to alpha_min."""
        assert clamp_initial_step(-1.0, 1.0, SolverConfig()) == 1e-3

    def test_ceiling(self):
        """Test large steps clamp to alpha_max."""
        assert clamp_initial_step(5e3, 4e3, SolverConfig()) == 1e3

    def test_both_absent(self):
        """Test the fallback when both quotients are absent."""
        assert clamp_initial_step(None, None, SolverConfig()) == 1.0


class TestSafeguardedInitialStep:
    """Test the curvature safeguard applied before clamping."""

    def test_negative_curvature_uses_bb3(self):
        """Test a pair with <s,v> < 0 yields the clamped BB3 rather than alpha_min."""
        assert safeguarded_initial_step([1.0, 0.0], [-0.5, 0.0], SolverConfig()) == pytest.approx(2.0)

    def test_orthogonal_pair_uses_bb3(self):
        """Test <s,v> = 0 leaves only BB3."""
        assert safeguarded_initial_step([1.0, 0.0], [0.0, 2.0], SolverConfig()) == pytest.approx(0.5)

    def test_positive_curvature_unchanged(self):
        """Test a positive pair gives the plain clamp."""
        s, v = [1.0, 1.0], [2.0, 0.0]
        steps = bb_steps(s, v)
        expected = clamp_initial_step(steps.bb1, steps.bb3, SolverConfig())
        assert safeguarded_initial_step(s, v, SolverConfig()) == pytest.approx(expected)
        assert expected == pytest.approx(0.70711, abs=1e-5)

    def test_tiny_bb3_still_floored(self):
        """Test the floor still applies to BB3."""
        assert safeguarded_initial_step([1e-6, 0.0], [-1.0, 0.0], SolverConfig()) == 1e-3

    def test_degenerate_pair(self):
        """Test a zero v falls back to 1."""
        assert safeguarded_initial_step([1.0, 0.0], [0.0, 0.0], SolverConfig()) == 1.0


class TestSecantDifference:
    """Test the gradient-change rules."""

    def test_rules(self):
        """Test the three secant rules on a two-objective Jacobian."""
        J_old = np.array([[1.0, 0.0], [0.0, 1.0]])
        J_new = np.array([[2.0, 0.0], [0.0, 3.0]])
        current = steepest_direction(J_new)
        d_old = steepest_direction(J_old).d

        weighted = secant_difference(SecantRule.WEIGHTED, J_old, J_new, d_old, current.d, current)
        np.testing.assert_allclose(weighted, current.weights.lam @ (J_new - J_old))

        direction = secant_difference(SecantRule.DIRECTION, J_old, J_new, d_old, current.d, current)
        np.testing.assert_allclose(direction, d_old - current.d)

        literal = secant_difference(SecantRule.LITERAL, J_old, J_new, d_old, current.d, current)
        np.testing.assert_allclose(literal, current.d - d_old)

    def test_plain_normalization_switches_weighted(self):
        """Test WEIGHTED becomes DIRECTION under plain normalization only."""
        assert effective_secant_rule(SecantRule.WEIGHTED, 0.0) is SecantRule.DIRECTION
        assert effective_secant_rule(SecantRule.WEIGHTED, 3.0) is SecantRule.WEIGHTED
        assert effective_secant_rule(SecantRule.WEIGHTED, None) is SecantRule.WEIGHTED
        assert effective_secant_rule(SecantRule.LITERAL, 0.0) is SecantRule.LITERAL


class TestSteepestDescent:
    """Test the monotone steepest descent solver."""

    def test_single_objective_quadratic(self, half_square):
        """Test one unit step reaches the minimizer."""
        record = solve_sdmo(half_square, [1.0, 0.0])
        assert record.iterations == 1
        assert record.fevals == 2
        assert record.accepted_steps == [1.0]
        np.testing.assert_allclose(record.x_final, [0.0, 0.0])
        assert record.terminated_by is TerminationReason.THETA_SMALL

    def test_jos1a_converges(self):
        """Test JOS1a terminates on the criticality test within the cap."""
        x0 = np.linspace(-1.0, 1.0, 50) + 1.0
        record = solve_sdmo(get_problem("JOS1a"), x0)
        assert record.terminated_by is TerminationReason.THETA_SMALL
        assert abs(record.final_theta) < 1e-8
        assert record.iterations < 500

    def test_monotone_objectives(self):
        """Test every objective decreases along a steepest descent run."""
        p = get_problem("WIT3")
        record = solve_sdmo(p, [-1.0, 1.5], SolverConfig(record_trace=True))
        values = [entry.f for entry in record.trace] + [record.f_final]
        for before, after in zip(values, values[1:]):
            assert np.all(after <= before)

    def test_max_iter(self):
        """Test the iteration cap."""
        x0 = np.linspace(-1.0, 1.0, 50) + 1.0
        record = solve_sdmo(get_problem("JOS1a"), x0, SolverConfig(max_iter=5))
        assert record.terminated_by is TerminationReason.MAX_ITER
        assert record.iterations == 5
        assert len(record.theta_trace) == 6

    def test_backtrack_failure(self):
        """Test an inconsistent gradient ends the run as a backtrack failure."""
        p = ProblemInstance(
            name="wrong_sign", n=1, m=1, lower=-10.0, upper=10.0, eta_default=1.0,
            evaluate=lambda x: np.array([x[0] ** 2]),
            jacobian=lambda x: np.array([[-2.0 * x[0]]]),
        )
        record = solve_sdmo(p, [1.0], SolverConfig(ls=LineSearchConfig(max_backtracks=5)))
        assert record.terminated_by is TerminationReason.BACKTRACK_FAIL
        assert record.iterations == 0
        assert record.fevals == 7
        assert "no acceptable step" in record.detail


class TestCriticalStarts:
    """Test runs starting at Pareto critical points."""

    @pytest.mark.parametrize("solver", [solve_sdmo, solve_gbb, solve_gbbn])
    def test_wit6_critical_start(self, solver):
        """Test a WIT6 Pareto critical start needs no iteration."""
        record = solver(get_problem("WIT6"), [1.0, 1.0])
        assert record.iterations == 0
        assert record.fevals == 1
        assert record.jevals == 1
        assert record.terminated_by is TerminationReason.THETA_SMALL

    def test_jos1a_critical_start(self):
        """Test a JOS1a point on the Pareto set."""
        record = solve_gbbn(get_problem("JOS1a"), np.ones(50))
        assert record.iterations == 0
        assert record.accepted_steps == []


class TestGlobalBB:
    """Test the global BB solvers."""

    @pytest.mark.parametrize("name", ["JOS1a", "JOS1b", "JOS1c", "JOS1d"])
    def test_gbb_jos1_single_step(self, name):
        """Test the unnormalized method reaches the JOS1 Pareto set in one step."""
        p = get_problem(name)
        for x0 in sample_starts(p, 10, 0):
            record = solve_gbb(p, x0)
            assert record.iterations == 1
            assert record.fevals == 2
            assert record.accepted_steps[0] == pytest.approx(p.n / 2.0)

    @pytest.mark.parametrize("name", ["JOS1c", "JOS1d"])
    def test_gbbn_jos1_single_step(self, name):
        """Test the normalized method reaches the JOS1 Pareto set in one step."""
        p = get_problem(name)
        for x0 in sample_starts(p, 10, 0):
            record = solve_gbbn(p, x0)
            assert record.iterations == 1
            assert record.fevals == 2
            assert record.eta == 3.0
            assert record.terminated_by is TerminationReason.THETA_SMALL

    def test_first_step_counts_jacobian(self):
        """Test the look-ahead secant pair costs a Jacobian evaluation but no function evaluation."""
        p = get_problem("JOS1c")
        record = solve_gbbn(p, sample_starts(p, 1, 0)[0])
        assert record.jevals == 3
        assert record.fevals == 2

    def test_unit_start_rule(self):
        """Test the unit first step cannot finish JOS1a in one iteration."""
        p = get_problem("JOS1a")
        record = solve_gbb(p, sample_starts(p, 1, 0)[0],
                           SolverConfig(initial_step=InitialStepRule.UNIT_START))
        assert record.initial_steps[0] == 1.0
        assert record.iterations > 1

    def test_unit_rule_single_memory_equals_steepest_descent(self):
        """Test unit steps with a one-slot memory reproduce steepest descent exactly."""
        cfg = SolverConfig(initial_step=InitialStepRule.UNIT, ls=LineSearchConfig(memory_M=1))
        for name in ("WIT2", "PNR", "DD1c"):
            p = get_problem(name)
            for x0 in sample_starts(p, 5, 1):
                gbb = solve_gbb(p, x0, cfg)
                sdmo = solve_sdmo(p, x0, cfg)
                assert gbb.iterations == sdmo.iterations
                assert gbb.fevals == sdmo.fevals
                assert gbb.accepted_steps == sdmo.accepted_steps
                assert np.array_equal(gbb.x_final, sdmo.x_final)

    def test_step_bound_on_imbalance(self):
        """Test every backtracking factor respects the normalized step bound."""
        cfg = SolverConfig(initial_step=InitialStepRule.UNIT)
        for name in ("Imbalance1", "Imbalance2"):
            p = get_problem(name)
            bound = min(1.0, 2.0 * 0.5 * (1.0 - 1e-4) * p.eta_default / lipschitz_constant(p))
            assert bound == pytest.approx(0.19998)
            for x0 in sample_starts(p, 20, 0):
                record = solve_gbbn(p, x0, cfg)
                for factor in record.step_factors(cfg.ls.delta):
                    assert factor >= bound

    def test_iterates_stay_in_box(self):
        """Test every recorded iterate lies in the box."""
        for name in ("Deb", "Hil", "LTDZ", "DD1d", "TRIDIA2"):
            p = get_problem(name)
            for x0 in sample_starts(p, 5, 2):
                record = solve_gbbn(p, x0, SolverConfig(record_trace=True))
                for entry in record.trace:
                    assert p.contains(entry.x, 1e-12)
                assert p.contains(record.x_final, 1e-12)

    def test_plain_normalization_zero_gradient(self):
        """Test a zero gradient under plain normalization is treated as critical."""
        record = solve_gbbn(get_problem("Imbalance1"), [0.0, 0.0], SolverConfig(eta=0.0))
        assert record.terminated_by is TerminationReason.THETA_SMALL
        assert record.iterations == 0
        assert record.final_theta == 0.0
        assert "vanishes" in record.detail

    def test_plain_normalization_converges(self):
        """Test plain normalization solves JOS1a."""
        p = get_problem("JOS1a")
        record = solve_gbbn(p, sample_starts(p, 1, 3)[0], SolverConfig(eta=0.0))
        assert record.terminated_by is TerminationReason.THETA_SMALL
        assert record.eta == 0.0

    def test_plain_normalization_needs_more_than_one_step(self):
        """Test the direction secant under plain normalization does not land on the JOS1 set at once."""
        p = get_problem("JOS1c")
        for x0 in sample_starts(p, 5, 0):
            record = solve_gbbn(p, x0, SolverConfig(eta=0.0))
            assert record.terminated_by is TerminationReason.THETA_SMALL
            assert record.iterations >= 2


class TestNonconvexRuns:
    """Test runs through regions of negative curvature and near singular sets."""

    @pytest.mark.parametrize("name", ["Deb", "Hil"])
    def test_no_iteration_cap(self, name):
        """Test negative-curvature secant pairs do not stall runs at alpha_min."""
        p = get_problem(name)
        for x0 in sample_starts(p, 30, 0):
            record = solve_gbbn(p, x0)
            assert record.terminated_by is not TerminationReason.MAX_ITER

    def test_sd_iterates_keep_their_signs(self):
        """Test SD iterates never cross a zero coordinate."""
        p = get_problem("SD")
        for x0 in sample_starts(p, 20, 0):
            record = solve_gbbn(p, x0, SolverConfig(record_trace=True))
            signs = np.sign(x0)
            for entry in record.trace:
                assert np.array_equal(np.sign(entry.x), signs)
            assert np.array_equal(np.sign(record.x_final), signs)
            assert np.all(np.isfinite(record.f_final))


class TestBoxHandling:
    """Test bound handling at faces."""

    @pytest.fixture
    def decreasing(self):
        """f(x) = -x on [-1, 1], minimized at the upper bound."""
        return ProblemInstance(
            name="decreasing", n=1, m=1, lower=-1.0, upper=1.0, eta_default=1.0,
            evaluate=lambda x: np.array([-x[0]]),
            jacobian=lambda x: np.array([[-1.0]]),
        )

    def test_face_restriction_makes_bound_critical(self, decreasing):
        """Test a bound minimizer is recognized when faces are respected."""
        record = solve_sdmo(decreasing, [1.0])
        assert record.terminated_by is TerminationReason.THETA_SMALL
        assert record.iterations == 0

    def test_blocked_direction_without_faces(self, decreasing):
        """Test an outward direction at the bound fails when faces are ignored."""
        record = solve_sdmo(decreasing, [1.0], SolverConfig(respect_box=False))
        assert record.terminated_by is TerminationReason.BACKTRACK_FAIL
        assert "blocked" in record.detail

    def test_reaches_bound(self, decreasing):
        """Test an interior start moves onto the bound and stops."""
        record = solve_gbb(decreasing, [0.0])
        np.testing.assert_allclose(record.x_final, [1.0])
        assert record.terminated_by is TerminationReason.THETA_SMALL


class TestInputValidation:
    """Test invalid start points."""

    def test_outside_box(self):
        """Test a start outside the box is rejected."""
        with pytest.raises(ValidationError, match="outside the box"):
            solve_gbbn(get_problem("Deb"), [0.0, 0.5])

    def test_wrong_length(self):
        """Test a start of the wrong length is rejected."""
        with pytest.raises(DimensionMismatch):
            solve_gbb(get_problem("PNR"), [0.0])


class TestSolverFactory:
    """Test solver registration and lookup."""

    def test_available_algorithms(self):
        """Test the registered names."""
        assert SolverFactory.available_algorithms() == ["sdmo", "gbb", "gbbn"]

    def test_create_solver(self):
        """Test creating solvers by name."""
        assert isinstance(SolverFactory.create_solver("SDMO"), SteepestDescentSolver)
        assert isinstance(SolverFactory.create_solver("gbb"), GlobalBBSolver)
        solver = SolverFactory.create_solver("gbbn")
        assert isinstance(solver, GBBNSolver)
        assert isinstance(solver, DescentSolver)
        assert solver.uses_normalization
        assert not SteepestDescentSolver().uses_normalization
        assert solver.get_description()

    def test_unknown_algorithm(self):
        """Test an unknown name raises BenchmarkError."""
        with pytest.raises(BenchmarkError, match="Unknown algorithm"):
            SolverFactory.create_solver("newton")


class TestCriticalityResidual:
    """Test the steepest-descent residual."""

    def test_single_objective_minimizer(self, half_square):
        """Test the residual vanishes at the minimizer."""
        assert pareto_critical_residual(half_square, [0.0, 0.0]) <= 1e-12

    def test_zero_gradient_point(self):
        """Test JOS1a at the origin is critical."""
        assert pareto_critical_residual(get_problem("JOS1a"), np.zeros(50)) == 0.0

    def test_gbbn_terminal_point(self):
        """Test converged GBBN runs on JOS1a end at steepest-descent critical points."""
        p = get_problem("JOS1a")
        for x0 in sample_starts(p, 10, 0):
            record = solve_gbbn(p, x0)
            assert record.converged
            assert pareto_critical_residual(p, record.x_final) <= 1e-6

    def test_non_critical_point(self):
        """Test a point off the Pareto set has a positive residual."""
        assert pareto_critical_residual(get_problem("WIT6"), [1.0, -1.0]) > 0.1

    @pytest.mark.parametrize("name", ["Deb", "DD1c", "WIT3", "PNR", "Imbalance2", "Hil"])
    def test_residual_bounded_by_normalizers(self, name):
        """Test |theta| <= |theta_eta| * max_i(||g_i|| + eta)^2 at interior terminal points."""
        p = get_problem(name)
        for x0 in sample_starts(p, 20, 0):
            record = solve_gbbn(p, x0)
            if not record.converged:
                continue
            x = record.x_final
            if not (np.all(x > p.lower + 1e-9) and np.all(x < p.upper - 1e-9)):
                continue
            scale = np.max(np.linalg.norm(eval_jacobian(p, x), axis=1) + p.eta_default)
            bound = abs(record.final_theta) * scale ** 2 * (1 + 1e-6) + 1e-12
            assert pareto_critical_residual(p, x) <= bound
