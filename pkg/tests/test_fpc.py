import numpy as np
import pytest

from cancorr.errors import InvalidInput
from cancorr.fpc import (
    FpcConfig,
    L1LsProblem,
    default_step,
    fpc_solve,
    max_lambda,
    optimality_residual,
    soft_threshold,
)
from cancorr.matops import pinv_times, thin_svd


class TestSoftThreshold:
    def test_basic_shrink(self):
        assert soft_threshold(1.2, 0.5) == pytest.approx(0.7)

    def test_below_threshold_is_zero(self):
        assert soft_threshold(-0.3, 0.5) == 0.0

    def test_zero_threshold_is_identity(self):
        rng = np.random.default_rng(0)
        w = rng.standard_normal(50)
        np.testing.assert_array_equal(soft_threshold(w, 0.0), w)

    def test_elementwise_on_matrices(self):
        w = np.array([[1.5, -0.2], [-2.0, 0.4]])
        out = soft_threshold(w, 0.5)
        np.testing.assert_allclose(out, [[1.0, 0.0], [-1.5, 0.0]])

    def test_nonexpansive(self):
        # |S(a) - S(b)| <= |a - b| over random triples
        rng = np.random.default_rng(1)
        a = rng.uniform(-5, 5, 500)
        b = rng.uniform(-5, 5, 500)
        nu = rng.uniform(0, 3, 500)
        gap = np.abs(soft_threshold(a, nu) - soft_threshold(b, nu))
        assert np.all(gap <= np.abs(a - b) + 1e-15)

    def test_negative_threshold_rejected(self):
        with pytest.raises(InvalidInput):
            soft_threshold(1.0, -0.1)


class TestMaxLambda:
    def test_identity_design(self):
        assert max_lambda(np.eye(2), np.array([3.0, -1.0])) == pytest.approx(3.0)

    def test_zero_target(self):
        assert max_lambda(np.eye(3), np.zeros(3)) == 0.0

    def test_subgradient_grid(self):
        # w=0 is optimal iff |(A t)_j| <= lambda for every j; scan a grid
        rng = np.random.default_rng(2)
        a = rng.standard_normal((4, 6))
        t = rng.standard_normal(6)
        cap = max_lambda(a, t)
        grad0 = np.array([sum(a[i, k] * t[k] for k in range(6)) for i in range(4)])
        for scale in (0.5, 0.9, 0.999):
            assert not np.all(np.abs(grad0) <= scale * cap)
        for scale in (1.0, 1.001, 2.0):
            assert np.all(np.abs(grad0) <= scale * cap)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInput):
            max_lambda(np.eye(2), np.ones(3))


class TestDefaultStep:
    def test_scaled_identity(self):
        assert default_step(2.0 * np.eye(3)) == pytest.approx(0.25)

    def test_orthonormal_rows(self):
        rng = np.random.default_rng(3)
        q, _ = np.linalg.qr(rng.standard_normal((6, 3)))
        assert default_step(q.T) == pytest.approx(1.0)

    def test_against_power_iteration(self):
        rng = np.random.default_rng(4)
        a = rng.standard_normal((5, 9))
        gram = a @ a.T
        v = rng.standard_normal(5)
        for _ in range(500):
            v = gram @ v
            v /= np.linalg.norm(v)
        lam_max = float(v @ gram @ v)
        assert abs(default_step(a) * lam_max - 1.0) < 1e-10

    def test_zero_matrix_rejected(self):
        with pytest.raises(InvalidInput):
            default_step(np.zeros((2, 2)))


def _random_problem(rng, d=8, n=20, cols=2, lam_scale=1e-2):
    a = rng.standard_normal((d, n))
    t = rng.standard_normal((n, cols))
    caps = np.array([max_lambda(a, t[:, i]) for i in range(cols)])
    return L1LsProblem(a, t, lam_scale * caps)


class TestFpcSolve:
    def test_identity_design_closed_form(self):
        # with A = I the minimizer is the soft-thresholded target
        prob = L1LsProblem(np.eye(2), np.array([[3.0], [-1.0]]), 1.0)
        res = fpc_solve(prob)
        np.testing.assert_allclose(res.solution, [[2.0], [0.0]], atol=1e-10)
        assert res.converged.all()

    def test_zero_solution_at_max_lambda(self):
        rng = np.random.default_rng(5)
        a = rng.standard_normal((4, 9))
        t = rng.standard_normal((9, 1))
        prob = L1LsProblem(a, t, max_lambda(a, t[:, 0]))
        res = fpc_solve(prob)
        assert np.all(res.solution == 0.0)
        assert res.converged.all()

    def test_tiny_lambda_matches_pseudoinverse(self):
        # consistent system: targets in the row space of the design
        rng = np.random.default_rng(6)
        a = rng.standard_normal((6, 12))
        w_true = rng.standard_normal((6, 1))
        t = a.T @ w_true
        cap = max_lambda(a, t[:, 0])
        prob = L1LsProblem(a, t, 1e-8 * cap)
        res = fpc_solve(prob, FpcConfig(xtol=1e-9, max_iters=50000))
        ls = pinv_times(thin_svd(a.T), t)
        resid_ls = 0.5 * np.linalg.norm(a.T @ ls - t) ** 2
        resid_fpc = 0.5 * np.linalg.norm(a.T @ res.solution - t) ** 2
        assert abs(resid_fpc - resid_ls) <= 1e-4 * (1.0 + resid_ls)
        np.testing.assert_allclose(res.solution, ls, rtol=1e-3, atol=1e-4)

    def test_least_squares_gradient_limit(self):
        rng = np.random.default_rng(7)
        a = rng.standard_normal((5, 11))
        t = a.T @ rng.standard_normal((5, 1))
        cap = max_lambda(a, t[:, 0])
        prob = L1LsProblem(a, t, 1e-8 * cap)
        res = fpc_solve(prob, FpcConfig(xtol=1e-10, max_iters=100000))
        grad = a @ (a.T @ res.solution - t)
        assert np.abs(grad).max() <= 1e-6 * cap

    def test_monotone_descent_with_fixed_default_step(self):
        rng = np.random.default_rng(8)
        prob = _random_problem(rng, cols=1)
        config = FpcConfig(
            use_bb_steps=False, continuation_stages=1, track_objectives=True
        )
        res = fpc_solve(prob, config)
        hist = np.array([h[0] for h in res.objective_history])
        assert hist.size > 2
        assert np.all(np.diff(hist) <= 1e-12 * np.maximum(1.0, np.abs(hist[:-1])))

    def test_converged_implies_residual_tolerance(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            prob = _random_problem(rng, lam_scale=10 ** rng.uniform(-4, -0.5))
            res = fpc_solve(prob)
            assert res.converged.all()
            resid = optimality_residual(prob, res.solution)
            tol = 1e-4 * (1.0 + np.linalg.norm(prob.targets, axis=0))
            assert np.all(resid <= tol)

    def test_support_identification(self):
        # entries with |final gradient| < lambda - 1e-6 are exactly zero
        rng = np.random.default_rng(10)
        for _ in range(10):
            prob = _random_problem(rng, lam_scale=0.3, cols=3)
            res = fpc_solve(prob)
            inside = np.abs(res.final_gradient) < prob.lambdas[None, :] - 1e-6
            assert np.all(res.solution[inside] == 0.0)

    def test_gradient_unique_across_solver_paths(self):
        # rank-deficient design: different FPC routes, same optimal gradient
        rng = np.random.default_rng(11)
        basis = rng.standard_normal((8, 3))
        a = basis @ rng.standard_normal((3, 20))
        t = rng.standard_normal((20, 2))
        caps = np.array([max_lambda(a, t[:, i]) for i in range(2)])
        prob = L1LsProblem(a, t, 0.05 * caps)
        res1 = fpc_solve(prob, FpcConfig(xtol=1e-8, max_iters=100000))
        res2 = fpc_solve(
            prob,
            FpcConfig(
                xtol=1e-8,
                max_iters=100000,
                use_bb_steps=False,
                continuation_stages=1,
            ),
        )
        scale = np.abs(a @ t).max()
        assert np.abs(res1.final_gradient - res2.final_gradient).max() <= 1e-4 * scale

    def test_per_column_lambdas_and_zero_column_flagging(self):
        rng = np.random.default_rng(12)
        a = rng.standard_normal((5, 10))
        t = rng.standard_normal((10, 2))
        caps = np.array([max_lambda(a, t[:, i]) for i in range(2)])
        prob = L1LsProblem(a, t, np.array([0.01 * caps[0], 1.5 * caps[1]]))
        res = fpc_solve(prob)
        assert np.any(res.solution[:, 0] != 0.0)
        assert np.all(res.solution[:, 1] == 0.0)

    def test_explicit_step_validation(self):
        prob = L1LsProblem(np.eye(2), np.ones((2, 1)), 0.1)
        with pytest.raises(InvalidInput):
            fpc_solve(prob, FpcConfig(step=2.5))  # lambda_max = 1, cap is 2
        res = fpc_solve(prob, FpcConfig(step=1.0, use_bb_steps=False))
        assert res.converged.all()

    def test_objective_field_matches_definition(self):
        rng = np.random.default_rng(13)
        prob = _random_problem(rng, cols=2)
        res = fpc_solve(prob)
        for i in range(2):
            expect = 0.5 * np.linalg.norm(
                prob.a.T @ res.solution[:, i] - prob.targets[:, i]
            ) ** 2 + prob.lambdas[i] * np.abs(res.solution[:, i]).sum()
            assert res.objective[i] == pytest.approx(expect, rel=1e-12)


class TestOptimalityResidual:
    def test_closed_form_solution_residual_zero(self):
        prob = L1LsProblem(np.eye(2), np.array([[3.0], [-1.0]]), 1.0)
        w = np.array([[2.0], [0.0]])
        assert optimality_residual(prob, w)[0] <= 1e-12

    def test_zero_solution_above_cap(self):
        rng = np.random.default_rng(14)
        a = rng.standard_normal((3, 7))
        t = rng.standard_normal((7, 1))
        prob = L1LsProblem(a, t, 1.1 * max_lambda(a, t[:, 0]))
        assert optimality_residual(prob, np.zeros((3, 1)))[0] == 0.0

    def test_against_directional_derivative(self):
        # residual bounds the steepest descent rate of the objective
        rng = np.random.default_rng(15)
        a = rng.standard_normal((4, 9))
        t = rng.standard_normal((9, 1))
        lam = 0.3 * max_lambda(a, t[:, 0])
        prob = L1LsProblem(a, t, lam)
        w = rng.standard_normal((4, 1))
        res = optimality_residual(prob, w)[0]

        def objective(v):
            return 0.5 * np.linalg.norm(a.T @ v - t[:, 0]) ** 2 + lam * np.abs(v).sum()

        # the coordinate attaining the residual gives a matching descent slope
        eps = 1e-7
        best = 0.0
        for j in range(4):
            for sign in (+1.0, -1.0):
                step = np.zeros(4)
                step[j] = sign * eps
                slope = (objective(w[:, 0] + step) - objective(w[:, 0])) / eps
                best = max(best, -slope)
        assert best == pytest.approx(res, abs=1e-5)


class TestProblemValidation:
    def test_row_mismatch(self):
        with pytest.raises(InvalidInput):
            L1LsProblem(np.eye(3), np.ones((2, 1)), 0.1)

    def test_nonpositive_lambda(self):
        with pytest.raises(InvalidInput):
            L1LsProblem(np.eye(2), np.ones((2, 1)), 0.0)
