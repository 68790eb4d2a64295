"""ADMM for the nuclear-norm penalized, max-norm constrained quadratic.

Minimizes

    (d1 d2 / n) sum N_jk theta_jk^2 - 2 (sqrt(d1 d2) / n) sum T_jk theta_jk + lambda ||Theta||_*

over ||Theta||_max <= R / sqrt(d1 d2), using the splitting Theta = W:

    Theta-step: entry-wise closed form, then clip to the box
    W-step:     singular value soft-thresholding of Theta + U at lambda / rho
    dual step:  U <- U + Theta - W

U is the scaled dual variable; it is rescaled whenever rho changes.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from numpy.typing import ArrayLike

from htreg.core.matrix import DenseMatrix, as_dense, nuclear_norm, svd
from htreg.errors import ParameterError, ShapeError
from htreg.matcomp.models import McConfig, McSolution, McSufficientStats
from htreg.transforms import soft_threshold

logger = logging.getLogger(__name__)

# Slack allowed when checking the objective trace for monotonicity.
MONOTONE_SLACK = 1e-10


def svt(m: ArrayLike, threshold: float) -> DenseMatrix:
    """Proximal map of threshold * ||.||_*: U diag(max(s - threshold, 0)) V^T."""
    if threshold < 0:
        raise ParameterError(f"threshold must be non-negative, got {threshold}")
    dec = svd(m)
    s = soft_threshold(dec.singular_values, threshold)
    keep = s > 0
    if not np.any(keep):
        return np.zeros_like(dec.u @ dec.vt)
    return (dec.u[:, keep] * s[keep]) @ dec.vt[keep, :]


def _quadratic_terms(stats: McSufficientStats) -> tuple[DenseMatrix, DenseMatrix]:
    d1, d2 = stats.shape
    a = (d1 * d2 / stats.n) * stats.counts
    b = (math.sqrt(d1 * d2) / stats.n) * stats.truncated_sums
    return a, b


def mc_objective(theta: ArrayLike, stats: McSufficientStats, lam: float) -> float:
    """vec(Theta)^T Sigma_XX vec(Theta) - 2 <Sigma_yX, Theta> + lam ||Theta||_*."""
    arr = as_dense(theta, "theta")
    if arr.shape != stats.shape:
        raise ShapeError(f"theta shape {arr.shape} does not match stats {stats.shape}")
    a, b = _quadratic_terms(stats)
    value = float(np.sum(a * arr * arr) - 2.0 * np.sum(b * arr))
    if lam > 0:
        value += lam * nuclear_norm(arr)
    return value


def _is_monotone(history: list[float]) -> bool:
    return all(
        later <= earlier + MONOTONE_SLACK * max(1.0, abs(earlier))
        for earlier, later in zip(history, history[1:])
    )


def solve_mc(stats: McSufficientStats, cfg: McConfig, lam: float) -> McSolution:
    """Run ADMM from Theta = W = U = 0.

    Stops when ||Theta - W||_F <= primal_tol * max(1, ||Theta||_F) and
    rho ||W - W_prev||_F <= dual_tol, or after ``cfg.admm.max_iter``
    iterations (the result then carries ``converged=False``).

    Unobserved cells have a zero quadratic coefficient, so their Theta-step
    is governed by the rho term alone.
    """
    if lam < 0:
        raise ParameterError(f"lambda must be non-negative, got {lam}")
    if stats.n < 1:
        raise ParameterError("solve_mc needs at least one observation")
    if stats.shape != (cfg.d1, cfg.d2):
        raise ShapeError(f"stats shape {stats.shape} does not match config ({cfg.d1}, {cfg.d2})")

    box = cfg.box
    zeros = np.zeros(stats.shape)
    if box == 0.0:
        value = mc_objective(zeros, stats, lam)
        return McSolution(
            estimate=zeros,
            theta=zeros.copy(),
            converged=True,
            iterations=0,
            primal_residual=0.0,
            dual_residual=0.0,
            rho=cfg.admm.rho,
            objective=value,
            objective_theta=value,
            objective_history=[value],
        )

    opts = cfg.admm
    a, b = _quadratic_terms(stats)
    rho = opts.rho
    theta = zeros.copy()
    w = zeros.copy()
    u = zeros.copy()
    history: list[float] = []
    converged = False
    r_norm = s_norm = math.inf
    iteration = 0

    for iteration in range(1, opts.max_iter + 1):
        v = w - u
        theta = np.clip((2.0 * b + rho * v) / (2.0 * a + rho), -box, box)
        w_prev = w
        w = svt(theta + u, lam / rho)
        u = u + theta - w

        r_norm = float(np.linalg.norm(theta - w))
        s_norm = float(rho * np.linalg.norm(w - w_prev))
        history.append(mc_objective(w, stats, lam))

        if r_norm <= opts.primal_tol * max(1.0, float(np.linalg.norm(theta))) and (
            s_norm <= opts.dual_tol
        ):
            converged = True
            break

        if opts.adaptive_rho:
            if r_norm > opts.balance_ratio * s_norm:
                rho *= opts.balance_factor
                u /= opts.balance_factor
            elif s_norm > opts.balance_ratio * r_norm:
                rho /= opts.balance_factor
                u *= opts.balance_factor

    monotone = _is_monotone(history)
    if not converged:
        logger.warning(
            f"ADMM stopped at max_iter={opts.max_iter} "
            f"(primal {r_norm:.3g}, dual {s_norm:.3g}, rho {rho:.3g})"
        )
    if not monotone:
        logger.debug(f"ADMM objective trace not monotone (final rho {rho:.3g})")

    return McSolution(
        estimate=w,
        theta=theta,
        converged=converged,
        iterations=iteration,
        primal_residual=r_norm,
        dual_residual=s_norm,
        rho=rho,
        objective=mc_objective(w, stats, lam),
        objective_theta=mc_objective(theta, stats, lam),
        objective_history=history,
        objective_monotone=monotone,
    )
