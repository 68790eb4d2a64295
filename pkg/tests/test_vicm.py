"""Tests for scores, truncated moments, CLIME and the direction estimator."""

import itertools
import math

import numpy as np
import pytest
from scipy import stats

from htreg.core.rng import RngHandle
from htreg.errors import InfeasibleProgramError, ParameterError, ShapeError
from htreg.simlab import VicmDesign, generate_vicm_data
from htreg.transforms import TruncationMatrix, soft_threshold
from htreg.vicm import (
    VicmConfig,
    VicmData,
    VicmSample,
    clime,
    clime_columns,
    direction_distance,
    direction_distance_detail,
    estimate_vicm,
    power_law_gamma,
    power_law_levels,
    score,
    score_matrix,
    select_lambda,
    symmetrize_min,
    theorem2_bounds,
    theorem2_lambda,
    truncated_covariance,
    truncated_cross_moment,
)


def _random_data(np_rng, n=200, d1=4, d2=3) -> VicmData:
    return VicmData(
        y=np_rng.standard_t(3, n),
        x=np_rng.standard_normal((n, d1)),
        z=np_rng.standard_normal((n, d2)),
    )


class TestScore:
    """Tests for score functions."""

    def test_gaussian_identity(self):
        """The Gaussian score is the identity."""
        np.testing.assert_array_equal(score([1.0, -2.0], "gaussian"), [1.0, -2.0])

    def test_student_t_at_one(self):
        """t_5 score at 1 is (5 + 1) / (5 + 1) = 1."""
        assert score([1.0], "student_t", nu=5.0)[0] == pytest.approx(1.0)

    @pytest.mark.parametrize("nu", [2.0, 5.0, 30.0])
    def test_student_t_matches_log_density(self, nu):
        """S(x) = -d/dx log p(x) by central differences."""
        x = np.linspace(-6, 6, 41)
        h = 1e-5
        numeric = -(stats.t.logpdf(x + h, nu) - stats.t.logpdf(x - h, nu)) / (2 * h)
        np.testing.assert_allclose(score_matrix(x, "student_t", nu=nu), numeric, atol=1e-6)

    def test_unknown_kind(self):
        """Unknown score names are parameter errors."""
        with pytest.raises(ParameterError, match="unknown score kind"):
            score([0.0], "laplace")


class TestMoments:
    """Tests for element-wise truncated moments."""

    def test_huge_levels_give_raw_mean(self, np_rng):
        """Levels above every product reproduce the untruncated mean."""
        data = _random_data(np_rng)
        raw = truncated_cross_moment(data, None)
        big = truncated_cross_moment(data, TruncationMatrix.constant(4, 3, 1e12))
        np.testing.assert_allclose(big, raw, atol=1e-12)
        cov_raw = truncated_covariance(data, None)
        cov_big = truncated_covariance(data, TruncationMatrix.constant(3, 3, 1e12))
        np.testing.assert_allclose(cov_big, cov_raw, atol=1e-12)

    def test_bounded_by_levels(self, np_rng):
        """|M_jk| <= Gamma_1[j, k] and the covariance is symmetric."""
        data = _random_data(np_rng)
        levels = TruncationMatrix(np_rng.uniform(0.01, 0.5, (4, 3)))
        moment = truncated_cross_moment(data, levels, "student_t", score_nu=4.0)
        assert np.all(np.abs(moment) <= levels.levels + 1e-15)
        cov = truncated_covariance(data, TruncationMatrix.constant(3, 3, 0.3))
        np.testing.assert_array_equal(cov, cov.T)
        assert np.abs(cov).max() <= 0.3 + 1e-15

    def test_level_shape_checked(self, np_rng):
        """Mismatched level shapes are rejected."""
        with pytest.raises(ShapeError):
            truncated_cross_moment(_random_data(np_rng), TruncationMatrix.constant(3, 3, 1.0))

    def test_accepts_sample_sequences(self):
        """Per-sample input matches the stacked form."""
        samples = [
            VicmSample(y=1.0, x=[1.0, 2.0], z=[1.0]),
            VicmSample(y=-1.0, x=[0.5, 0.0], z=[2.0]),
        ]
        moment = truncated_cross_moment(samples, None)
        np.testing.assert_allclose(moment, [[0.5 * (1.0 - 1.0)], [0.5 * 2.0]])


class TestClime:
    """Tests for the CLIME linear programs."""

    def test_identity_shrinks(self):
        """Sigma = I with gamma 0.3 gives 0.7 I."""
        np.testing.assert_allclose(clime(np.eye(3), 0.3), 0.7 * np.eye(3), atol=1e-8)

    def test_identity_exact(self):
        """Sigma = I with gamma 0 gives I."""
        np.testing.assert_allclose(clime(np.eye(4), 0.0), np.eye(4), atol=1e-8)

    def test_column_feasibility_and_optimality(self, np_rng):
        """Columns are feasible and no random feasible perturbation has smaller l1 norm."""
        for _ in range(20):
            d = int(np_rng.integers(2, 6))
            g = np_rng.standard_normal((3 * d, d))
            sigma = g.T @ g / (3 * d)
            gamma = float(np_rng.uniform(0.01, 0.3))
            cols = clime_columns(sigma, gamma)
            assert np.abs(sigma @ cols - np.eye(d)).max() <= gamma + 1e-9
            for k in range(d):
                w = cols[:, k]
                e_k = np.eye(d)[k]
                moves = w + np_rng.standard_normal((2000, d)) * np_rng.choice([1e-3, 1e-2, 1e-1])
                feasible = np.abs(moves @ sigma.T - e_k).max(axis=1) <= gamma
                l1 = np.abs(moves[feasible]).sum(axis=1)
                assert np.all(l1 >= np.abs(w).sum() - 1e-7)

    def test_matches_vertex_enumeration(self, np_rng):
        """Column l1 norms match a brute-force search over the LP vertices."""

        def brute_force(sigma, k, gamma):
            d = sigma.shape[0]
            e_k = np.eye(d)[k]
            # rows a with a w = b: both slab faces, then the coordinate planes
            rows = np.vstack([sigma, sigma, np.eye(d)])
            rhs = np.concatenate([e_k + gamma, e_k - gamma, np.zeros(d)])
            best = np.inf
            for active in itertools.combinations(range(3 * d), d):
                a = rows[list(active)]
                if abs(np.linalg.det(a)) < 1e-12:
                    continue
                w = np.linalg.solve(a, rhs[list(active)])
                if np.abs(sigma @ w - e_k).max() <= gamma + 1e-9:
                    best = min(best, float(np.abs(w).sum()))
            return best

        for _ in range(20):
            d = int(np_rng.integers(2, 5))
            g = np_rng.standard_normal((3 * d, d))
            sigma = g.T @ g / (3 * d)
            gamma = float(np_rng.uniform(0.01, 0.3))
            cols = clime_columns(sigma, gamma)
            for k in range(d):
                assert np.abs(cols[:, k]).sum() == pytest.approx(
                    brute_force(sigma, k, gamma), abs=1e-7
                )

    def test_symmetrize_keeps_smaller(self):
        """The smaller-magnitude entry of each symmetric pair wins."""
        omega = np.array([[1.0, -0.2], [0.5, 2.0]])
        np.testing.assert_array_equal(symmetrize_min(omega), [[1.0, -0.2], [-0.2, 2.0]])

    def test_threads_match_serial(self, np_rng):
        """Parallel column solves give the same estimate."""
        g = np_rng.standard_normal((20, 5))
        sigma = g.T @ g / 20
        np.testing.assert_allclose(clime(sigma, 0.1, threads=3), clime(sigma, 0.1), atol=1e-12)

    def test_infeasible(self):
        """A zero covariance cannot reach the identity."""
        with pytest.raises(InfeasibleProgramError) as exc:
            clime(np.zeros((2, 2)), 0.25)
        assert exc.value.column == 0

    def test_negative_gamma(self):
        """gamma must be non-negative."""
        with pytest.raises(ParameterError):
            clime(np.eye(2), -0.1)


class TestEstimateVicm:
    """Tests for the element-wise truncated direction estimator."""

    def test_zero_lambda_returns_a(self, np_rng):
        """With lambda = 0 the estimate equals A = M Omega_hat."""
        data = _random_data(np_rng)
        fit = estimate_vicm(data, VicmConfig(d1=4, d2=3, clime_gamma=0.05, truncate=False))
        np.testing.assert_array_equal(fit.theta_hat, fit.a_matrix)
        np.testing.assert_allclose(fit.a_matrix, fit.moment_matrix @ fit.omega_hat)
        assert fit.levels is None

    def test_soft_threshold_minimizes_objective(self, np_rng):
        """The estimate minimizes ||T||_F^2 - 2 <A, T> + lambda ||T||_{1,1}."""
        data = _random_data(np_rng)
        lam = 0.1
        fit = estimate_vicm(data, VicmConfig(d1=4, d2=3, clime_gamma=0.05, **{"lambda": lam}))

        def objective(t):
            return (
                np.sum(t * t, axis=(-2, -1))
                - 2 * np.sum(fit.a_matrix * t, axis=(-2, -1))
                + lam * np.abs(t).sum(axis=(-2, -1))
            )

        best = objective(fit.theta_hat)
        perturbed = fit.theta_hat + 0.05 * np_rng.standard_normal((5000, 4, 3))
        assert np.all(objective(perturbed) >= best - 1e-12)

    def test_matches_proximal_gradient(self, np_rng):
        """Closed-form soft-thresholding equals a proximal-gradient solve."""
        for _ in range(50):
            a = np_rng.standard_normal((4, 3))
            lam = float(np_rng.uniform(0.0, 2.0))
            theta = np.zeros_like(a)
            step = 0.2
            for _ in range(2000):
                nxt = soft_threshold(theta - step * (2 * theta - 2 * a), step * lam)
                if np.abs(nxt - theta).max() <= 1e-14:
                    break
                theta = nxt
            np.testing.assert_allclose(soft_threshold(a, lam / 2), nxt, atol=1e-8)

    def test_large_lambda_gives_zero(self, np_rng):
        """lambda above 2 max|A| zeroes the estimate."""
        data = _random_data(np_rng)
        base = estimate_vicm(data, VicmConfig(d1=4, d2=3, clime_gamma=0.05))
        lam = 2 * np.abs(base.a_matrix).max() + 1e-9
        fit = estimate_vicm(data, VicmConfig(d1=4, d2=3, clime_gamma=0.05, **{"lambda": lam}))
        assert not fit.theta_hat.any()

    def test_calibrated_levels_attached(self, np_rng):
        """Calibrated tuning returns the levels used."""
        data = _random_data(np_rng)
        fit = estimate_vicm(data, VicmConfig(d1=4, d2=3, clime_gamma=0.05))
        assert fit.levels.gamma1.shape == (4, 3)
        assert fit.levels.gamma2.shape == (3, 3)
        assert fit.levels.target1 == pytest.approx(10 * math.log(12))

    def test_power_law_levels_used(self, np_rng):
        """power_law tuning truncates at c sqrt(n / log)."""
        data = _random_data(np_rng, n=300)
        cfg = VicmConfig(d1=4, d2=3, clime_gamma=0.05, tuning="power_law", tau1_scale=0.01)
        fit = estimate_vicm(data, cfg)
        tau1 = 0.01 * math.sqrt(300 / math.log(12))
        assert np.abs(fit.moment_matrix).max() <= tau1 + 1e-15

    def test_recovers_linear_directions(self):
        """Linear links with Gaussian designs recover Theta* up to sign."""
        design = VicmDesign(
            d1=10, d2=3, s=2, battery="linear", design="gaussian", z_gaussian=True
        )
        data, theta = generate_vicm_data(RngHandle(7), 20000, design)
        gamma = power_law_gamma(data.n, 3)
        fit = estimate_vicm(data, VicmConfig(d1=10, d2=3, clime_gamma=gamma, truncate=False))
        assert direction_distance(fit.theta_hat, theta) < 0.3

    def test_preconditions(self, np_rng):
        """Too few samples or mismatched dimensions are rejected."""
        data = _random_data(np_rng)
        with pytest.raises(ShapeError):
            estimate_vicm(data, VicmConfig(d1=5, d2=3, clime_gamma=0.1))
        one = VicmData(y=data.y[:1], x=data.x[:1], z=data.z[:1])
        with pytest.raises(ParameterError):
            estimate_vicm(one, VicmConfig(d1=4, d2=3, clime_gamma=0.1))


class TestDirectionDistance:
    """Tests for rho."""

    def test_scale_and_sign_invariant(self, np_rng):
        """Rescaling columns by nonzero constants of any sign gives 0."""
        truth = np_rng.standard_normal((6, 3))
        truth /= np.linalg.norm(truth, axis=0)
        est = truth * np.array([2.0, -0.5, 7.0])
        assert direction_distance(est, truth) == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_column(self):
        """An orthogonal unit column contributes 2, so rho = sqrt(2)."""
        est = np.array([[1.0], [0.0]])
        truth = np.array([[0.0], [1.0]])
        assert direction_distance(est, truth) == pytest.approx(math.sqrt(2))

    def test_zero_column(self):
        """A zero column contributes 1 and is reported."""
        truth = np.eye(3)[:, :2]
        est = truth.copy()
        est[:, 1] = 0.0
        detail = direction_distance_detail(est, truth)
        assert detail.value == pytest.approx(1.0)
        assert detail.zero_columns == (1,)

    def test_shape_mismatch(self):
        """Differing shapes are rejected."""
        with pytest.raises(ShapeError):
            direction_distance(np.eye(2), np.eye(3))


class TestTuning:
    """Tests for lambda selection and schedules."""

    def test_select_lambda_picks_best(self):
        """The penalty removing the spurious entry wins."""
        truth = np.array([[1.0], [0.0]])
        a = np.array([[1.0], [0.3]])
        lam, theta, rho = select_lambda(a, truth, [0.0, 1.0, 5.0])
        assert lam == 1.0
        np.testing.assert_allclose(theta, soft_threshold(a, 0.5))
        assert rho == pytest.approx(0.0)

    def test_select_lambda_ties_keep_smaller(self):
        """Equal rho keeps the smaller penalty."""
        truth = np.array([[1.0], [0.0]])
        a = np.array([[2.0], [0.0]])
        lam, _, _ = select_lambda(a, truth, [0.5, 0.1])
        assert lam == 0.1

    def test_select_lambda_empty(self):
        """An empty grid is rejected."""
        with pytest.raises(ParameterError):
            select_lambda(np.eye(2), np.eye(2), [])

    def test_power_law_schedule(self):
        """tau1, tau2 and gamma follow their square-root rules."""
        g1, g2 = power_law_levels(1000, 20, 4, 2.0, 3.0)
        assert g1.levels[0, 0] == pytest.approx(2.0 * math.sqrt(1000 / math.log(80)))
        assert g2.levels[3, 3] == pytest.approx(3.0 * math.sqrt(1000 / math.log(4)))
        assert power_law_gamma(1000, 4, 0.5) == pytest.approx(0.5 * math.sqrt(math.log(4) / 1000))
        with pytest.raises(ParameterError):
            power_law_levels(1000, 20, 1)

    def test_oracle_lambda_formula(self):
        """The oracle penalty adds the cross-moment and covariance terms."""
        lam = theorem2_lambda(
            moment_bound=16.0,
            omega_l11=2.0,
            mu_max=1.0,
            theta_sigma_inf=1.5,
            varpi=1.0,
            n=100,
            d1=5,
            d2=2,
        )
        first = 8 * 8.0 * 2.0 * math.sqrt(3 * math.log(10) / 100)
        second = 16 * 1.5 * 4.0 * math.sqrt(4 * math.log(2) / 100)
        assert lam == pytest.approx(first + second)

    def test_oracle_bounds(self):
        """Frobenius and l1,1 bounds scale with s d2."""
        fro, l11 = theorem2_bounds(0.1, 4, 9)
        assert fro == pytest.approx(2 * 0.1 * 6)
        assert l11 == pytest.approx(8 * 0.1 * 36)
