"""Tests for truncated matrix completion: statistics, schedules, SVT and ADMM."""

import itertools
import logging
import math

import numpy as np
import pytest

import htreg.matcomp.admm as admm_module
from htreg.errors import DataError, ParameterError, ShapeError
from htreg.matcomp import (
    AdmmConfig,
    McBatch,
    McConfig,
    McSample,
    McSufficientStats,
    accumulate_stats,
    complexity,
    mc_objective,
    merge_stats,
    rate_exponents,
    schedule_remark1,
    schedule_theorem1,
    solve_mc,
    svt,
    theorem1_rate,
    theoretical_slope,
)


def _cfg(d1=4, d2=4, **kwargs) -> McConfig:
    base = dict(d1=d1, d2=d2, rank_bound=1, max_norm_budget=10.0, moment_index=2.0)
    base.update(kwargs)
    return McConfig(**base)


def _full_observation(theta: np.ndarray, repeats: int = 1) -> McBatch:
    d1, d2 = theta.shape
    rows, cols = np.divmod(np.tile(np.arange(d1 * d2), repeats), d2)
    return McBatch(
        rows=rows.astype(np.int64),
        cols=cols.astype(np.int64),
        responses=math.sqrt(d1 * d2) * theta[rows, cols],
    )


def _random_instance(np_rng) -> tuple[McSufficientStats, McConfig, float]:
    """Small heavy-tailed instance with a random box and penalty."""
    d = int(np_rng.integers(2, 6))
    theta_star = np_rng.standard_normal((d, d))
    n = int(np_rng.integers(d * d, 8 * d * d))
    batch = McBatch(
        rows=np_rng.integers(0, d, n),
        cols=np_rng.integers(0, d, n),
        responses=d * theta_star.ravel()[np_rng.integers(0, d * d, n)] + np_rng.standard_t(2, n),
    )
    stats = accumulate_stats(batch, d, d, tau=3.0)
    cfg = _cfg(d, d, max_norm_budget=float(np_rng.uniform(0.5, 3.0)))
    return stats, cfg, float(np_rng.uniform(0, 0.5))


class TestAccumulateStats:
    """Tests for sufficient statistics."""

    def test_single_sample_clipped(self):
        """One sample at (1, 1) with y=5 and tau=2."""
        stats = accumulate_stats([McSample(row=1, col=1, response=5.0)], 3, 3, tau=2.0)
        assert stats.counts[1, 1] == 1
        assert stats.truncated_sums[1, 1] == 2.0
        assert stats.n == 1

    def test_duplicates_sum(self):
        """Two samples at (2, 3) with y = 1, -1 cancel."""
        samples = [McSample(row=2, col=3, response=1.0), McSample(row=2, col=3, response=-1.0)]
        stats = accumulate_stats(samples, 4, 4, tau=10.0)
        assert stats.counts[2, 3] == 2
        assert stats.truncated_sums[2, 3] == 0.0

    def test_empty(self):
        """No samples gives all-zero statistics."""
        stats = accumulate_stats([], 2, 3)
        assert stats.n == 0
        assert stats.counts.shape == (2, 3)
        assert not stats.counts.any() and not stats.truncated_sums.any()

    def test_out_of_range_reports_position(self):
        """Out-of-range indices are data errors with the sample position."""
        samples = [McSample(row=0, col=0, response=1.0), McSample(row=5, col=0, response=1.0)]
        with pytest.raises(DataError) as exc:
            accumulate_stats(samples, 3, 3)
        assert exc.value.position == 1

    def test_tau_positive(self):
        """tau must be positive."""
        with pytest.raises(ParameterError):
            accumulate_stats([], 2, 2, tau=0.0)

    def test_invariants(self, np_rng):
        """Counts sum to n and |T| <= counts * tau."""
        n = 5000
        batch = McBatch(
            rows=np_rng.integers(0, 6, n),
            cols=np_rng.integers(0, 7, n),
            responses=np_rng.standard_cauchy(n),
        )
        stats = accumulate_stats(batch, 6, 7, tau=1.5)
        assert stats.counts.sum() == n
        assert np.all(np.abs(stats.truncated_sums) <= stats.counts * 1.5 + 1e-12)

    def test_merge_matches_single_pass(self, np_rng):
        """Merging shard statistics equals accumulating the whole sample."""
        n = 1000
        rows, cols = np_rng.integers(0, 4, n), np_rng.integers(0, 5, n)
        y = np_rng.standard_normal(n)
        whole = accumulate_stats(McBatch(rows, cols, y), 4, 5, tau=1.0)
        a = accumulate_stats(McBatch(rows[:400], cols[:400], y[:400]), 4, 5, tau=1.0)
        b = accumulate_stats(McBatch(rows[400:], cols[400:], y[400:]), 4, 5, tau=1.0)
        merged = merge_stats(a, b)
        assert merged.n == whole.n
        np.testing.assert_array_equal(merged.counts, whole.counts)
        np.testing.assert_allclose(merged.truncated_sums, whole.truncated_sums, atol=1e-12)

    def test_merge_rejects_different_tau(self):
        """Shards truncated at different levels cannot be merged."""
        a = accumulate_stats([], 2, 2, tau=1.0)
        b = accumulate_stats([], 2, 2, tau=2.0)
        with pytest.raises(ParameterError):
            merge_stats(a, b)


class TestSchedule:
    """Tests for the sample-size driven tau and lambda."""

    def test_ratio_one(self):
        """alpha=2, L=1, C1=1 and n close to D give tau close to 1."""
        cfg = _cfg(20, 20, tau_scale=1.0)
        d = complexity(20, 20)
        n = round(d)
        sched = schedule_theorem1(cfg, n, 1.0)
        assert sched.tau == pytest.approx(math.sqrt(n / d), rel=1e-14)
        assert sched.tau == pytest.approx(1.0, rel=0.01)

    def test_lambda_formula(self):
        """lambda = C2 (D/n)^{(a-1)/a} (L^{1/a} delta + R delta + L^{1/a})."""
        cfg = _cfg(10, 12, moment_index=1.5, lambda_scale=0.3, confidence=1.2, max_norm_budget=2.0)
        sched = schedule_theorem1(cfg, 5000, 2.0)
        d = 12 * math.log(22)
        root = 2.0 ** (1 / 1.5)
        expected = 0.3 * (d / 5000) ** (0.5 / 1.5) * (root * 1.2 + 2.0 * 1.2 + root)
        assert sched.lambda_ == pytest.approx(expected, rel=1e-13)

    @pytest.mark.parametrize("alpha", [1.1, 1.5, 2.0])
    def test_doubling_n(self, alpha):
        """Doubling n scales tau by 2^{1/a} and lambda by 2^{-(a-1)/a}."""
        cfg = _cfg(20, 20, moment_index=alpha)
        a = schedule_theorem1(cfg, 4000, 1.0)
        b = schedule_theorem1(cfg, 8000, 1.0)
        assert b.tau / a.tau == pytest.approx(2 ** (1 / alpha), rel=1e-12)
        assert b.lambda_ / a.lambda_ == pytest.approx(2 ** (-(alpha - 1) / alpha), rel=1e-12)

    @pytest.mark.parametrize("alpha", [1.01, 1.001])
    def test_lambda_flat_near_one(self, alpha):
        """As alpha approaches 1 lambda barely moves with n."""
        cfg = _cfg(20, 20, moment_index=alpha)
        ratio = schedule_theorem1(cfg, 8000, 1.0).lambda_ / schedule_theorem1(cfg, 4000, 1.0).lambda_
        assert ratio == pytest.approx(1.0, abs=0.01)

    def test_exponents_clamp_above_two(self):
        """alpha = 3 clamps both exponents at 1/2."""
        assert rate_exponents(3.0) == (0.5, 0.5)
        sched = schedule_remark1(3.0, _cfg(20, 20), 4000, 1.0)
        assert sched.tau_exponent == 0.5
        assert sched.lambda_exponent == 0.5
        override = schedule_theorem1(_cfg(20, 20), 4000, 1.0, alpha=3.0)
        assert override.tau == sched.tau

    def test_small_sample_warns(self, caplog):
        """n below (d1 v d2) log(d1 + d2) logs a warning but still returns."""
        with caplog.at_level(logging.WARNING, logger="htreg"):
            sched = schedule_theorem1(_cfg(20, 20), 10, 1.0)
        assert not sched.sample_size_ok
        assert "rates may not hold" in caplog.text

    @pytest.mark.parametrize("n,L", [(0, 1.0), (100, 0.0)])
    def test_invalid_inputs(self, n, L):
        """Non-positive n or L_alpha are rejected."""
        with pytest.raises(ParameterError):
            schedule_theorem1(_cfg(), n, L)

    def test_theoretical_slopes(self):
        """Predicted slopes for the three heavy-tailed noises."""
        assert theoretical_slope(1.99) == pytest.approx(-0.497, abs=5e-4)
        assert theoretical_slope(1.49) == pytest.approx(-0.329, abs=5e-4)
        assert theoretical_slope(1.09) == pytest.approx(-0.083, abs=5e-4)

    def test_rate_scales_with_sqrt_rank(self):
        """theorem1_rate is proportional to sqrt(r)."""
        r1 = theorem1_rate(_cfg(10, 10, rank_bound=1), 1000)
        r4 = theorem1_rate(_cfg(10, 10, rank_bound=4), 1000)
        assert r4 / r1 == pytest.approx(2.0)

    def test_config_validation(self):
        """Moment index outside (1, 2] and oversized rank are rejected."""
        with pytest.raises(ValueError):
            _cfg(moment_index=2.5)
        with pytest.raises(ValueError):
            _cfg(d1=3, d2=3, rank_bound=4)


class TestSvt:
    """Tests for singular value soft-thresholding."""

    def test_zero_threshold(self, np_rng):
        """Threshold 0 reproduces the input."""
        m = np_rng.standard_normal((5, 3))
        np.testing.assert_allclose(svt(m, 0.0), m, atol=1e-10)

    def test_large_threshold(self, np_rng):
        """Threshold above the top singular value gives zero."""
        m = np_rng.standard_normal((4, 4))
        top = np.linalg.svd(m, compute_uv=False)[0]
        assert not svt(m, top + 1e-9).any()

    def test_diagonal(self):
        """diag(3, 1) at threshold 2 is diag(1, 0)."""
        np.testing.assert_allclose(svt(np.diag([3.0, 1.0]), 2.0), np.diag([1.0, 0.0]), atol=1e-12)

    def test_negative_threshold(self):
        """Negative thresholds are rejected."""
        with pytest.raises(ParameterError):
            svt(np.eye(2), -1.0)

    def test_prox_optimality(self, np_rng):
        """svt beats random perturbations on the proximal objective."""

        def prox_objective(w, m, t):
            nuc = np.linalg.svd(w, compute_uv=False).sum(axis=-1)
            return 0.5 * np.sum((w - m) ** 2, axis=(-2, -1)) + t * nuc

        for _ in range(200):
            m = np_rng.standard_normal((6, 6))
            t = float(np_rng.uniform(0.1, 2.0))
            w = svt(m, t)
            best = prox_objective(w, m, t)
            scale = np_rng.choice([1e-3, 1e-1, 1.0])
            perturbed = w + scale * np_rng.standard_normal((1000, 6, 6))
            assert np.all(prox_objective(perturbed, m, t) >= best - 1e-10)


class TestSolveMc:
    """Tests for the ADMM solver."""

    def test_noiseless_full_observation(self, np_rng):
        """lambda=0 with every cell observed once recovers Theta*."""
        theta_star = np_rng.standard_normal((5, 5)) / 5
        stats = accumulate_stats(_full_observation(theta_star), 5, 5)
        cfg = _cfg(5, 5, max_norm_budget=100.0, admm=AdmmConfig(primal_tol=1e-10, dual_tol=1e-10))
        sol = solve_mc(stats, cfg, 0.0)
        assert sol.converged
        assert np.linalg.norm(sol.estimate - theta_star) <= 1e-6

    def test_large_lambda_gives_zero(self, np_rng):
        """lambda above 2 ||Sigma_yX||_op makes zero optimal."""
        theta_star = np_rng.standard_normal((4, 4)) / 4
        batch = _full_observation(theta_star, repeats=3)
        stats = accumulate_stats(batch, 4, 4)
        b = (4.0 / stats.n) * stats.truncated_sums
        lam = 4.0 * np.linalg.norm(b, 2)
        cfg = _cfg(4, 4, max_norm_budget=8.0)
        sol = solve_mc(stats, cfg, lam)
        assert np.abs(sol.estimate).max() <= 1e-8
        points = np_rng.uniform(-cfg.box, cfg.box, size=(1000, 4, 4))
        zero_value = mc_objective(np.zeros((4, 4)), stats, lam)
        assert all(mc_objective(p, stats, lam) >= zero_value for p in points)

    def test_zero_box(self):
        """R = 0 returns exactly zero."""
        stats = accumulate_stats(_full_observation(np.ones((3, 3))), 3, 3)
        sol = solve_mc(stats, _cfg(3, 3, max_norm_budget=0.0), 0.1)
        assert not sol.estimate.any()
        assert sol.converged and sol.iterations == 0

    def test_theta_iterate_in_box(self, np_rng):
        """The Theta iterate always respects the max-norm box."""
        for _ in range(100):
            stats, cfg, lam = _random_instance(np_rng)
            sol = solve_mc(stats, cfg, lam)
            assert np.abs(sol.theta).max() <= cfg.box + 1e-9
            assert len(sol.objective_history) == sol.iterations
            if sol.converged:
                assert sol.objective == pytest.approx(sol.objective_theta, rel=1e-6)

    def test_monotone_flag_matches_trace(self, np_rng, caplog):
        """objective_monotone reflects the trace; a broken trace is logged with rho."""
        with caplog.at_level(logging.DEBUG, logger="htreg.matcomp.admm"):
            for _ in range(100):
                caplog.clear()
                stats, cfg, lam = _random_instance(np_rng)
                sol = solve_mc(stats, cfg, lam)
                h = sol.objective_history
                expected = all(
                    later <= earlier + 1e-10 * max(1.0, abs(earlier))
                    for earlier, later in zip(h, h[1:])
                )
                assert sol.objective_monotone == expected
                assert sol.rho > 0
                if sol.objective_monotone:
                    assert "not monotone" not in caplog.text
                else:
                    assert f"not monotone (final rho {sol.rho:.3g})" in caplog.text

    def test_rising_trace_flagged(self, monkeypatch, caplog):
        """An objective that grows every iteration is flagged with the final rho."""
        ticks = itertools.count()
        monkeypatch.setattr(admm_module, "mc_objective", lambda theta, stats, lam: float(next(ticks)))
        stats = accumulate_stats(_full_observation(np.eye(3) / 3), 3, 3)
        cfg = _cfg(
            3,
            3,
            admm=AdmmConfig(
                rho=0.5, max_iter=20, primal_tol=1e-14, dual_tol=1e-14, adaptive_rho=False
            ),
        )
        with caplog.at_level(logging.DEBUG, logger="htreg.matcomp.admm"):
            sol = solve_mc(stats, cfg, 0.01)
        assert len(sol.objective_history) == 20
        assert not sol.objective_monotone
        assert sol.rho == 0.5
        assert "not monotone (final rho 0.5)" in caplog.text

    def test_fixed_rho_reported(self, np_rng):
        """Without residual balancing the reported rho is the configured one."""
        stats, cfg, lam = _random_instance(np_rng)
        cfg = cfg.model_copy(update={"admm": AdmmConfig(rho=2.0, adaptive_rho=False)})
        assert solve_mc(stats, cfg, lam).rho == 2.0

    def test_non_convergence_flagged(self, caplog):
        """Hitting max_iter returns a flagged result and logs a warning."""
        stats = accumulate_stats(_full_observation(np.eye(3) / 3), 3, 3)
        cfg = _cfg(3, 3, admm=AdmmConfig(max_iter=1, primal_tol=1e-14, dual_tol=1e-14))
        with caplog.at_level(logging.WARNING, logger="htreg"):
            sol = solve_mc(stats, cfg, 0.01)
        assert not sol.converged
        assert sol.iterations == 1
        assert "max_iter" in caplog.text

    def test_preconditions(self):
        """Negative lambda, empty stats and shape mismatch are rejected."""
        stats = accumulate_stats(_full_observation(np.eye(3)), 3, 3)
        with pytest.raises(ParameterError):
            solve_mc(stats, _cfg(3, 3), -1.0)
        with pytest.raises(ParameterError):
            solve_mc(accumulate_stats([], 3, 3), _cfg(3, 3), 0.1)
        with pytest.raises(ShapeError):
            solve_mc(stats, _cfg(4, 4), 0.1)
