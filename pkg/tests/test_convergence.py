"""Closed-form Lyapunov solution and the sufficient stability check."""

import math

import numpy as np
import pytest
import scipy.linalg

from bitalloc.convergence import (
    check_convergence_conditions,
    check_schedule,
    lyapunov_solution,
    state_matrix,
)
from bitalloc.problem import ContractViolation
from bitalloc.swarm import SwarmConfig


class TestWorkedExample:
    """w = 0.6, c1 = c2 = 1 is the reference point checked by hand."""

    def test_exact_matrix_entries(self):
        report = check_convergence_conditions(0.6, 1.0, 1.0)
        # den = 2 * 1 * (1 + 1 - 0.6) = 2.8
        assert report.P[0, 0] == pytest.approx(0.8428571428571429, abs=1e-15)
        assert report.P[0, 1] == pytest.approx(-0.2714285714285714, abs=1e-15)
        assert report.P[1, 0] == report.P[0, 1]
        assert report.P[1, 1] == pytest.approx(0.7714285714285715, abs=1e-15)

    def test_eigenvalue_and_threshold(self):
        report = check_convergence_conditions(0.6, 1.0, 1.0)
        assert report.lambda_max_P == pytest.approx(1.080911, abs=1e-4)
        assert report.threshold == pytest.approx(0.42874646285627205, abs=1e-15)

    def test_verdict(self):
        report = check_convergence_conditions(0.6, 1.0, 1.0)
        assert report.condition_1 is True
        assert report.condition_2 is False
        assert report.guaranteed is False


class TestLyapunovSolution:
    GRID_W = (0.1, 0.4, 0.6, 0.9, 1.2)
    GRID_C = (0.25, 0.5, 1.0, 1.5, 2.5)

    def test_residual_vanishes_on_grid(self):
        for w in self.GRID_W:
            for c in self.GRID_C:
                A = state_matrix(w, c)
                P = lyapunov_solution(w, c)
                residual = P @ A + A.T @ P + np.eye(2)
                assert np.abs(residual).max() <= 1e-12, (w, c)

    def test_matches_generic_solver(self):
        for w in self.GRID_W:
            for c in self.GRID_C:
                A = state_matrix(w, c)
                expected = scipy.linalg.solve_continuous_lyapunov(A.T, -np.eye(2))
                np.testing.assert_allclose(
                    lyapunov_solution(w, c), expected, atol=1e-10, err_msg=f"w={w} c={c}"
                )

    def test_symmetric(self):
        P = lyapunov_solution(0.7, 1.3)
        assert P[0, 1] == P[1, 0]

    def test_singular_pairs_rejected(self):
        with pytest.raises(ContractViolation):
            lyapunov_solution(2.0, 1.0)  # 1 + c - w = 0
        with pytest.raises(ContractViolation):
            lyapunov_solution(0.5, 0.0)  # c = 0


class TestCheckConvergenceConditions:
    def test_only_mean_attraction_matters(self):
        a = check_convergence_conditions(0.55, 0.5, 2.5)
        b = check_convergence_conditions(0.55, 2.5, 0.5)
        c = check_convergence_conditions(0.55, 1.5, 1.5)
        for other in (b, c):
            assert other.c == a.c == 1.5
            np.testing.assert_array_equal(other.P, a.P)
            assert other.lambda_max_P == a.lambda_max_P
            assert other.threshold == a.threshold

    def test_condition_1_boundaries(self):
        assert check_convergence_conditions(2.5, 1.0, 1.0).condition_1 is False
        assert check_convergence_conditions(-0.1, 1.0, 1.0).condition_1 is False
        assert check_convergence_conditions(0.0, 1.0, 1.0).condition_1 is False
        assert check_convergence_conditions(1.9, 1.0, 1.0).condition_1 is True

    def test_nonpositive_mean_attraction_rejected(self):
        with pytest.raises(ContractViolation):
            check_convergence_conditions(0.6, 0.0, 0.0)
        with pytest.raises(ContractViolation):
            check_convergence_conditions(0.6, 1.0, -1.0)

    def test_non_finite_rejected(self):
        with pytest.raises(ContractViolation):
            check_convergence_conditions(math.nan, 1.0, 1.0)
        with pytest.raises(ContractViolation):
            check_convergence_conditions(0.6, math.inf, 1.0)

    def test_threshold_formula(self):
        report = check_convergence_conditions(0.3, 0.4, 0.6)
        c = 0.5
        assert report.threshold == pytest.approx(1.0 / (2.0 * math.sqrt(c * c + 0.09)))


class TestScheduleCheck:
    def test_default_schedule_worst_point(self):
        cfg = SwarmConfig()
        report = check_schedule(
            cfg.w_min, cfg.w_max, cfg.c1_min, cfg.c1_max, cfg.c2_min, cfg.c2_max, cfg.i_iter
        )
        # Opposite equal-rate acceleration sweeps keep c pinned at 1.5.
        assert report.c == pytest.approx(1.5)
        assert report.guaranteed is False
        # Manual scan: the margin threshold - lambda_max(P) must match
        # the minimum over the same scheduled points.
        margins = []
        for it in range(1, cfg.i_iter + 1):
            frac = it / cfg.i_iter
            w = cfg.w_max - (cfg.w_max - cfg.w_min) * frac
            point = check_convergence_conditions(w, 1.5, 1.5)
            margins.append(point.threshold - point.lambda_max_P)
        assert report.threshold - report.lambda_max_P == pytest.approx(min(margins))

    def test_every_default_schedule_point_fails_condition_2(self):
        cfg = SwarmConfig()
        for it in range(1, cfg.i_iter + 1, 7):
            frac = it / cfg.i_iter
            w = cfg.w_max - (cfg.w_max - cfg.w_min) * frac
            assert check_convergence_conditions(w, 1.5, 1.5).condition_2 is False

    def test_constant_schedule_reduces_to_point_check(self):
        report = check_schedule(0.6, 0.6, 1.0, 1.0, 1.0, 1.0, 25)
        point = check_convergence_conditions(0.6, 1.0, 1.0)
        np.testing.assert_array_equal(report.P, point.P)
        assert report.lambda_max_P == point.lambda_max_P

    def test_bad_iteration_count_rejected(self):
        with pytest.raises(ContractViolation):
            check_schedule(0.4, 0.9, 0.5, 2.5, 0.5, 2.5, 0)
