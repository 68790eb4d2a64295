"""Truncated-response matrix completion."""

from htreg.matcomp.admm import mc_objective, solve_mc, svt
from htreg.matcomp.models import (
    AdmmConfig,
    McBatch,
    McConfig,
    McSample,
    McSolution,
    McSufficientStats,
    Schedule,
)
from htreg.matcomp.schedule import (
    complexity,
    rate_exponents,
    schedule_remark1,
    schedule_theorem1,
    theorem1_rate,
    theoretical_slope,
)
from htreg.matcomp.stats import accumulate_stats, merge_stats

__all__ = [
    "AdmmConfig",
    "McBatch",
    "McConfig",
    "McSample",
    "McSolution",
    "McSufficientStats",
    "Schedule",
    "accumulate_stats",
    "complexity",
    "mc_objective",
    "merge_stats",
    "rate_exponents",
    "schedule_remark1",
    "schedule_theorem1",
    "solve_mc",
    "svt",
    "theorem1_rate",
    "theoretical_slope",
]
