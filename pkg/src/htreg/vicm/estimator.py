"""Element-wise truncated direction estimator for varying index coefficient models.

The objective

    ||Theta||_F^2 - 2 <M Omega_hat, Theta> + lambda ||Theta||_{1,1}

decouples per entry, so with A = M Omega_hat its minimizer is the
soft-threshold sign(A) max(|A| - lambda/2, 0). M is the truncated cross
moment (1/n) sum psi(y S(X) Z^T) and Omega_hat the CLIME estimate built on
the truncated covariance of Z.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from numpy.typing import ArrayLike

from htreg.core.matrix import DenseMatrix, as_dense
from htreg.errors import ParameterError, ShapeError
from htreg.transforms import (
    TruncationMatrix,
    VicmLevels,
    calibrate_vicm_levels,
    soft_threshold,
)
from htreg.vicm.clime import clime
from htreg.vicm.models import VicmConfig, VicmData, VicmFit, VicmSample
from htreg.vicm.moments import truncated_covariance, truncated_cross_moment

logger = logging.getLogger(__name__)


def power_law_levels(
    n: int, d1: int, d2: int, tau1_scale: float = 1.0, tau2_scale: float = 1.0
) -> tuple[TruncationMatrix, TruncationMatrix]:
    """Constant levels c1 sqrt(n / log(d1 d2)) and c2 sqrt(n / log d2)."""
    if d1 * d2 < 2 or d2 < 2:
        raise ParameterError("power-law levels need d2 >= 2 so that log terms are positive")
    tau1 = tau1_scale * math.sqrt(n / math.log(d1 * d2))
    tau2 = tau2_scale * math.sqrt(n / math.log(d2))
    return TruncationMatrix.constant(d1, d2, tau1), TruncationMatrix.constant(d2, d2, tau2)


def power_law_gamma(n: int, d2: int, gamma_scale: float = 1.0) -> float:
    """CLIME constraint level c3 sqrt(log d2 / n)."""
    if d2 < 2:
        raise ParameterError("gamma schedule needs d2 >= 2")
    return gamma_scale * math.sqrt(math.log(d2) / n)


def _moments(
    data: VicmData, cfg: VicmConfig
) -> tuple[DenseMatrix, DenseMatrix, VicmLevels | None]:
    if not cfg.truncate:
        moment = truncated_cross_moment(data, None, cfg.score_kind, score_nu=cfg.score_nu)
        return moment, truncated_covariance(data, None), None

    if cfg.tuning == "calibrated":
        levels = calibrate_vicm_levels(
            data,
            cfg.score_kind,
            score_nu=cfg.score_nu,
            target1=cfg.target1,
            target2=cfg.target2,
            factor=cfg.calibration_factor,
            threads=cfg.threads,
        )
        gamma1, gamma2 = levels.gamma1, levels.gamma2
    else:
        levels = None
        gamma1, gamma2 = power_law_levels(
            data.n, data.d1, data.d2, cfg.tau1_scale, cfg.tau2_scale
        )
    moment = truncated_cross_moment(data, gamma1, cfg.score_kind, score_nu=cfg.score_nu)
    return moment, truncated_covariance(data, gamma2), levels


def estimate_vicm(
    samples: Union[VicmData, Sequence[VicmSample]],
    cfg: VicmConfig,
) -> VicmFit:
    """Calibrate, build moments, run CLIME and soft-threshold A = M Omega_hat."""
    data = VicmData.coerce(samples)
    if data.n < 2:
        raise ParameterError(f"estimate_vicm needs at least 2 samples, got {data.n}")
    if (data.d1, data.d2) != (cfg.d1, cfg.d2):
        raise ShapeError(
            f"data dimensions ({data.d1}, {data.d2}) do not match config ({cfg.d1}, {cfg.d2})"
        )

    moment, covariance, levels = _moments(data, cfg)
    omega = clime(covariance, cfg.clime_gamma, threads=cfg.threads)
    a_matrix = moment @ omega
    theta_hat = soft_threshold(a_matrix, cfg.lambda_ / 2.0)
    logger.debug(
        f"VICM fit n={data.n} truncate={cfg.truncate} gamma={cfg.clime_gamma:.4g} "
        f"lambda={cfg.lambda_:.4g} nonzeros={int(np.count_nonzero(theta_hat))}"
    )
    return VicmFit(
        theta_hat=theta_hat,
        omega_hat=omega,
        moment_matrix=moment,
        covariance=covariance,
        a_matrix=a_matrix,
        levels=levels,
    )


@dataclass(frozen=True)
class DirectionDistance:
    """rho together with the columns that could not be normalized."""

    value: float
    zero_columns: tuple[int, ...]


def direction_distance_detail(theta_hat: ArrayLike, theta_star: ArrayLike) -> DirectionDistance:
    """Sign-resolved distance between normalized estimated and true columns.

    A zero estimated column cannot be normalized and contributes 1 by
    convention; its index is reported in ``zero_columns``.
    """
    est = as_dense(theta_hat, "theta_hat")
    truth = as_dense(theta_star, "theta_star")
    if est.shape != truth.shape:
        raise ShapeError(f"theta_hat {est.shape} and theta_star {truth.shape} differ")
    norms = np.linalg.norm(est, axis=0)
    zero = norms == 0
    unit = np.divide(est, norms, out=np.zeros_like(est), where=~zero)
    minus = np.sum((unit - truth) ** 2, axis=0)
    plus = np.sum((unit + truth) ** 2, axis=0)
    contrib = np.where(zero, 1.0, np.minimum(minus, plus))
    return DirectionDistance(
        value=float(np.sqrt(contrib.sum())),
        zero_columns=tuple(int(k) for k in np.flatnonzero(zero)),
    )


def direction_distance(theta_hat: ArrayLike, theta_star: ArrayLike) -> float:
    """rho(Theta_hat, Theta_star)."""
    return direction_distance_detail(theta_hat, theta_star).value


def select_lambda(
    a_matrix: ArrayLike, theta_star: ArrayLike, grid: Sequence[float]
) -> tuple[float, DenseMatrix, float]:
    """Pick the grid penalty minimizing rho against a known truth.

    Returns (lambda, Theta_hat, rho). Ties keep the smaller penalty.
    """
    if not grid:
        raise ParameterError("lambda grid is empty")
    a = as_dense(a_matrix, "A")
    best: tuple[float, DenseMatrix, float] | None = None
    for lam in sorted(float(g) for g in grid):
        if lam < 0:
            raise ParameterError(f"lambda grid values must be non-negative, got {lam}")
        theta = soft_threshold(a, lam / 2.0)
        rho = direction_distance(theta, theta_star)
        if best is None or rho < best[2]:
            best = (lam, theta, rho)
    return best


def theorem2_lambda(
    *,
    moment_bound: float,
    omega_l11: float,
    mu_max: float,
    theta_sigma_inf: float,
    varpi: float,
    n: int,
    d1: int,
    d2: int,
) -> float:
    """Penalty from oracle constants:

    8 M^{3/4} ||Omega*||_{1,1} sqrt(3 log(d1 d2) / n)
      + 16 max|mu*| ||Theta* Sigma*||_inf M^{1/2} varpi^2 sqrt(4 log d2 / n)
    """
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    first = 8.0 * moment_bound**0.75 * omega_l11 * math.sqrt(3.0 * math.log(d1 * d2) / n)
    second = (
        16.0
        * mu_max
        * theta_sigma_inf
        * math.sqrt(moment_bound)
        * varpi**2
        * math.sqrt(4.0 * math.log(d2) / n)
    )
    return first + second


def theorem2_bounds(lam: float, s: int, d2: int) -> tuple[float, float]:
    """High-probability error bounds (Frobenius 2 lam sqrt(s d2), l1,1 8 lam s d2)."""
    return 2.0 * lam * math.sqrt(s * d2), 8.0 * lam * s * d2
