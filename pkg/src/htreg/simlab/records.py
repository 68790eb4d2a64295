"""Per-replicate records and log-log rate fitting."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from htreg.errors import InsufficientDataError, ParameterError

EstimatorKind = Literal["robust", "standard"]

# Mean errors at or below this are treated as exact recovery.
ERROR_FLOOR = 1e-4


class ExperimentRecord(BaseModel):
    """Error of one estimator on one replicate."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    experiment_id: str
    estimator: EstimatorKind
    noise: str
    n: int = Field(ge=1)
    replicate: int = Field(ge=0)
    # None when the fit failed numerically; see note
    error: Optional[float] = Field(default=None, ge=0)
    converged: bool = True
    tau: Optional[float] = None
    lambda_: Optional[float] = Field(default=None, alias="lambda")
    note: str = ""
    wall_time_s: Optional[float] = Field(default=None, ge=0)

    @property
    def failed(self) -> bool:
        return self.error is None

    def sort_key(self) -> Tuple[str, str, str, int, int]:
        return (self.experiment_id, self.estimator, self.noise, self.n, self.replicate)


def sort_records(records: Iterable[ExperimentRecord]) -> List[ExperimentRecord]:
    return sorted(records, key=ExperimentRecord.sort_key)


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares line log(error) = intercept + slope log(n)."""

    slope: float
    intercept: float
    r_squared: float
    points: int


def fit_power_law(ns: Sequence[float], errors: Sequence[float]) -> SlopeFit:
    """Fit log error on log n by ordinary least squares.

    Raises:
        InsufficientDataError: With fewer than 3 distinct sample sizes.
        ParameterError: If an error or sample size is not positive.
    """
    x = np.asarray(ns, dtype=np.float64)
    y = np.asarray(errors, dtype=np.float64)
    if x.shape != y.shape:
        raise ParameterError("sample sizes and errors must have equal length")
    if np.unique(x).size < 3:
        raise InsufficientDataError(
            f"need at least 3 distinct sample sizes for a slope, got {np.unique(x).size}"
        )
    if np.any(x <= 0) or np.any(~(y > 0)):
        raise ParameterError("log-log fit needs positive sample sizes and errors")
    lx, ly = np.log(x), np.log(y)
    design = np.column_stack([np.ones_like(lx), lx])
    (intercept, slope), *_ = np.linalg.lstsq(design, ly, rcond=None)
    resid = ly - (intercept + slope * lx)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    # constant errors: a flat line fits exactly
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    if ss_tot == 0.0:
        slope = 0.0
    return SlopeFit(slope=float(slope), intercept=float(intercept), r_squared=r2, points=len(x))


def mean_errors(
    records: Iterable[ExperimentRecord], *, estimator: str, noise: str
) -> List[Tuple[int, float, int]]:
    """(n, mean error, replicate count) per sample size, sorted by n.

    Failed replicates are left out of both the mean and the count.
    """
    by_n: Dict[int, List[float]] = defaultdict(list)
    for r in records:
        if r.estimator == estimator and r.noise == noise and r.error is not None:
            by_n[r.n].append(r.error)
    return [(n, float(np.mean(v)), len(v)) for n, v in sorted(by_n.items())]


def fit_loglog_slope(
    records: Iterable[ExperimentRecord], *, estimator: str, noise: str
) -> SlopeFit:
    """Slope of log(mean error) against log(n) for one estimator and noise."""
    points = mean_errors(records, estimator=estimator, noise=noise)
    return fit_power_law([p[0] for p in points], [p[1] for p in points])


class GroupSummary(BaseModel):
    """Aggregates of one (estimator, noise) series."""

    estimator: EstimatorKind
    noise: str
    n: List[int]
    mean_error: List[float]
    replicates: List[int]
    non_converged: int = 0
    failed: int = 0
    # every mean error at or below the floor; no slope is fitted
    at_floor: bool = False
    slope: Optional[float] = None
    intercept: Optional[float] = None
    r_squared: Optional[float] = None
    theoretical_slope: Optional[float] = None


class ComparisonRow(BaseModel):
    noise: str
    n: int
    robust: float
    standard: float
    # None when the standard error is zero
    ratio: Optional[float] = None


class ExperimentSummary(BaseModel):
    experiment_id: str
    groups: List[GroupSummary]
    comparison: List[ComparisonRow]


def summarize_records(
    records: Sequence[ExperimentRecord],
    theoretical: Optional[Dict[str, float]] = None,
    *,
    floor: float = ERROR_FLOOR,
) -> ExperimentSummary:
    """Mean errors, fitted slopes and a robust-vs-standard comparison.

    ``theoretical`` maps a noise tag to the predicted slope of the robust
    estimator. Series with fewer than 3 sample sizes, or whose mean errors
    all sit at or below ``floor`` (solver tolerance), get no slope. Failed
    replicates are counted per group but do not enter the means.
    """
    if not records:
        raise ParameterError("no records to summarize")
    theoretical = theoretical or {}
    keys = sorted({(r.estimator, r.noise) for r in records})
    groups: List[GroupSummary] = []
    means: Dict[Tuple[str, str, int], float] = {}
    for estimator, noise in keys:
        points = mean_errors(records, estimator=estimator, noise=noise)
        for n, m, _ in points:
            means[(estimator, noise, n)] = m
        series = [r for r in records if r.estimator == estimator and r.noise == noise]
        group = GroupSummary(
            estimator=estimator,
            noise=noise,
            n=[p[0] for p in points],
            mean_error=[p[1] for p in points],
            replicates=[p[2] for p in points],
            non_converged=sum(1 for r in series if not r.converged),
            failed=sum(1 for r in series if r.failed),
            theoretical_slope=theoretical.get(noise) if estimator == "robust" else None,
        )
        group.at_floor = bool(points) and max(group.mean_error) <= floor
        fit = None
        if points and not group.at_floor:
            try:
                fit = fit_power_law(group.n, group.mean_error)
            except ParameterError:
                fit = None
        if fit is not None:
            group.slope, group.intercept, group.r_squared = fit.slope, fit.intercept, fit.r_squared
        groups.append(group)

    comparison: List[ComparisonRow] = []
    for (estimator, noise, n), robust in sorted(means.items()):
        if estimator != "robust":
            continue
        standard = means.get(("standard", noise, n))
        if standard is None:
            continue
        ratio = robust / standard if standard > 0 else None
        comparison.append(
            ComparisonRow(noise=noise, n=n, robust=robust, standard=standard, ratio=ratio)
        )
    return ExperimentSummary(
        experiment_id=records[0].experiment_id, groups=groups, comparison=comparison
    )
