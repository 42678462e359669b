"""
Unit tests for data models with validation.

Tests cover simplex weights, dual results, direction outcomes, run records and
benchmark rows.
"""

import sys
import os
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

import numpy as np
import pytest
from gbbn.models import (
    SimplexWeights, DualResult, DirectionOutcome, IterationLog, RunRecord, BenchRow, BenchReport,
    TerminationReason, ValidationError
)


def _record(**overrides):
    values = dict(
        problem="WIT1", algorithm="gbbn", iterations=2, fevals=5, jevals=3,
        accepted_steps=[2.0, 0.5], initial_steps=[2.0, 2.0], backtracks=[0, 2],
        theta_trace=[-1.0, -0.1, -1e-9], x_final=np.array([0.5, 0.5]), f_final=np.array([1.0, 2.0]),
        terminated_by=TerminationReason.THETA_SMALL, wall_time=0.002, eta=40.0,
    )
    values.update(overrides)
    return RunRecord(**values)


def _row(**overrides):
    values = dict(
        problem="WIT1", algorithm="gbbn", eta=40.0, runs=3, mean_iter=2.0, mean_feval=4.0,
        mean_stepsize=1.5, mean_time_ms=0.3, theta_small=2, max_iter=1, backtrack_fail=0,
    )
    values.update(overrides)
    return BenchRow(**values)


class TestSimplexWeights:
    """Test cases for SimplexWeights."""

    def test_valid_weights(self):
        """Test creation of valid weights."""
        weights = SimplexWeights([0.25, 0.0, 0.75])
        assert weights.size == 3
        assert weights.support() == (0, 2)

    def test_negative_weight(self):
        """Test validation fails for a negative weight."""
        with pytest.raises(ValidationError, match="nonnegative"):
            SimplexWeights([1.5, -0.5])

    def test_sum_not_one(self):
        """Test validation fails when weights do not sum to one."""
        with pytest.raises(ValidationError, match="sum to one"):
            SimplexWeights([0.5, 0.4])

    def test_empty(self):
        """Test validation fails for empty weights."""
        with pytest.raises(ValidationError, match="empty"):
            SimplexWeights([])

    def test_not_finite(self):
        """Test validation fails for NaN weights."""
        with pytest.raises(ValidationError, match="finite"):
            SimplexWeights([np.nan, 1.0])

    def test_matrix_rejected(self):
        """Test a two-dimensional array is rejected."""
        with pytest.raises(ValidationError):
            SimplexWeights([[1.0]])


class TestDualResult:
    """Test cases for DualResult."""

    def test_negative_gap(self):
        """Test validation fails for a negative gap."""
        with pytest.raises(ValidationError, match="gap"):
            DualResult(SimplexWeights([1.0]), [1.0, 0.0], 0.5, -1.0, 0)

    def test_negative_value(self):
        """Test validation fails for a negative value."""
        with pytest.raises(ValidationError, match="value"):
            DualResult(SimplexWeights([1.0]), [1.0, 0.0], -0.5, 0.0, 0)


class TestDirectionOutcome:
    """Test cases for DirectionOutcome."""

    def _outcome(self, **overrides):
        values = dict(
            d=[-1.0, 0.0], theta=-0.5, weights=SimplexWeights([1.0]), normalizers=[1.0],
            active_set={0}, scaled_jacobian=np.array([[1.0, 0.0]]),
        )
        values.update(overrides)
        return DirectionOutcome(**values)

    def test_valid_outcome(self):
        """Test a valid outcome."""
        out = self._outcome()
        assert out.norm_squared == 1.0
        assert out.active_set == frozenset({0})

    def test_positive_theta(self):
        """Test validation fails for a positive theta."""
        with pytest.raises(ValidationError, match="nonpositive"):
            self._outcome(theta=0.1)

    def test_normalizer_count(self):
        """Test one normalizer per objective is required."""
        with pytest.raises(ValidationError, match="normalizer"):
            self._outcome(normalizers=[1.0, 1.0])

    def test_nonpositive_normalizer(self):
        """Test normalizers must be positive."""
        with pytest.raises(ValidationError, match="positive"):
            self._outcome(normalizers=[0.0])

    def test_jacobian_shape(self):
        """Test the scaled Jacobian must match direction and weights."""
        with pytest.raises(ValidationError, match="shape"):
            self._outcome(scaled_jacobian=np.array([[1.0, 0.0, 0.0]]))


class TestRunRecord:
    """Test cases for RunRecord."""

    def test_properties(self):
        """Test derived values."""
        record = _record()
        assert record.final_theta == -1e-9
        assert record.converged
        assert record.step_factors(0.5) == [1.0, 0.25]

    def test_empty_theta_trace(self):
        """Test a record without thetas reports zero."""
        assert _record(iterations=0, accepted_steps=[], initial_steps=[], backtracks=[],
                       theta_trace=[]).final_theta == 0.0

    def test_to_dict(self):
        """Test the JSON-ready form."""
        data = _record().to_dict()
        assert data['terminated_by'] == "ThetaSmall"
        assert data['wall_time_ms'] == pytest.approx(2.0)
        assert data['x_final'] == [0.5, 0.5]
        assert data['eta'] == 40.0

    def test_step_count_mismatch(self):
        """Test one accepted step per iteration is required."""
        with pytest.raises(ValidationError, match="accepted step"):
            _record(accepted_steps=[1.0])

    def test_backtrack_count_mismatch(self):
        """Test one backtrack count per iteration is required."""
        with pytest.raises(ValidationError, match="backtrack"):
            _record(backtracks=[0])

    def test_positive_theta(self):
        """Test the theta trace must be nonpositive."""
        with pytest.raises(ValidationError, match="nonpositive"):
            _record(theta_trace=[-1.0, 0.5, -1e-9])

    def test_no_evaluations(self):
        """Test the start point must have been evaluated."""
        with pytest.raises(ValidationError, match="evaluated"):
            _record(fevals=0)

    def test_reason_type(self):
        """Test the termination reason must be the enum."""
        with pytest.raises(ValidationError, match="TerminationReason"):
            _record(terminated_by="ThetaSmall")

    def test_iteration_log(self):
        """Test trace entries count backtracks."""
        entry = IterationLog(k=0, x=np.zeros(2), f=np.zeros(2), reference=np.zeros(2), jd=np.zeros(2),
                             theta=-1.0, alpha0=1.0, alpha=0.25, trials=3)
        assert entry.backtracks == 2


class TestBenchRow:
    """Test cases for BenchRow and BenchReport."""

    def test_valid_row(self):
        """Test a consistent row."""
        assert _row().runs == 3

    def test_counts_must_add_up(self):
        """Test termination counts must sum to the number of runs."""
        with pytest.raises(ValidationError, match="do not add up"):
            _row(theta_small=3)

    def test_needs_runs(self):
        """Test a row needs at least one run."""
        with pytest.raises(ValidationError, match="at least one run"):
            _row(runs=0, theta_small=0, max_iter=0)

    def test_report_lookup(self):
        """Test row lookup and problem order."""
        report = BenchReport(rows=[_row(), _row(algorithm="gbb"), _row(problem="Deb")])
        assert report.get_row("WIT1", "gbb").algorithm == "gbb"
        assert report.problems() == ["WIT1", "Deb"]
        with pytest.raises(KeyError):
            report.get_row("Deb", "sdmo")
