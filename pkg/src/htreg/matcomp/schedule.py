"""Sample-size driven choices of tau and lambda for the truncated estimator.

With D = (d1 v d2) log(d1 + d2):

    tau    = C1 (L n / D)^{1/alpha}
    lambda = C2 (D / n)^{(alpha-1)/alpha} (L^{1/alpha} delta + R delta + L^{1/alpha})

Above alpha = 2 the exponents saturate at 1/2 (the adaptive min-rule).
"""

from __future__ import annotations

import logging
import math
from typing import Optional

from htreg.errors import ParameterError
from htreg.matcomp.models import McConfig, Schedule

logger = logging.getLogger(__name__)


def complexity(d1: int, d2: int) -> float:
    """(d1 v d2) log(d1 + d2)."""
    return max(d1, d2) * math.log(d1 + d2)


def rate_exponents(alpha: float) -> tuple[float, float]:
    """(tau exponent, lambda exponent) = (max{1/a, 1/2}, min{(a-1)/a, 1/2})."""
    if not alpha > 1:
        raise ParameterError(f"moment index alpha must exceed 1, got {alpha}")
    return max(1.0 / alpha, 0.5), min((alpha - 1.0) / alpha, 0.5)


def schedule_theorem1(
    cfg: McConfig,
    n: int,
    L_alpha: float,
    *,
    alpha: Optional[float] = None,
) -> Schedule:
    """Truncation level and penalty for ``n`` samples.

    ``alpha`` overrides ``cfg.moment_index`` and may exceed 2; it is then
    handled by :func:`schedule_remark1`. A sample size below
    (d1 v d2) log(d1 + d2) is logged and flagged but not fatal.
    """
    a = cfg.moment_index if alpha is None else float(alpha)
    return schedule_remark1(a, cfg, n, L_alpha)


def schedule_remark1(alpha: float, cfg: McConfig, n: int, L_alpha: float) -> Schedule:
    """Schedule with the adaptive exponents max{1/a, 1/2} and min{(a-1)/a, 1/2}.

    Valid for any alpha > 1; for alpha in (1, 2] it coincides with the
    plain rate.
    """
    if n < 1:
        raise ParameterError(f"sample size must be positive, got {n}")
    if not L_alpha > 0:
        raise ParameterError(f"L_alpha must be positive, got {L_alpha}")
    a = float(alpha)
    tau_exp, lam_exp = rate_exponents(a)
    d = complexity(cfg.d1, cfg.d2)

    ok = n >= d
    if not ok:
        logger.warning(f"n={n} is below (d1 v d2) log(d1 + d2) = {d:.1f}; rates may not hold")

    root_l = L_alpha ** (1.0 / a)
    tau = cfg.tau_scale * (L_alpha * n / d) ** tau_exp
    lam = (
        cfg.lambda_scale
        * (d / n) ** lam_exp
        * (root_l * cfg.confidence + cfg.max_norm_budget * cfg.confidence + root_l)
    )
    return Schedule(
        tau=tau,
        lambda_=lam,
        tau_exponent=tau_exp,
        lambda_exponent=lam_exp,
        sample_size_ok=ok,
    )


def theorem1_rate(cfg: McConfig, n: int, *, alpha: Optional[float] = None) -> float:
    """Predicted Frobenius error order sqrt(r) (D/n)^{min{(a-1)/a, 1/2}}."""
    a = cfg.moment_index if alpha is None else float(alpha)
    _, lam_exp = rate_exponents(a)
    return math.sqrt(cfg.rank_bound) * (complexity(cfg.d1, cfg.d2) / n) ** lam_exp


def theoretical_slope(alpha: float) -> float:
    """Log-log slope of the error in n: -min{(alpha-1)/alpha, 1/2}."""
    return -rate_exponents(alpha)[1]
