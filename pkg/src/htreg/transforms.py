"""Truncation and shrinkage primitives plus data-driven truncation levels.

psi_tau(x) = sign(x) * min(|x|, tau) clips a value to [-tau, tau]. The
calibration routines pick tau so that

    sum_i psi_tau(x_i)^2 / tau^2 = target

which is the adaptive equation used to set truncation levels without
cross-validation.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from htreg.core.matrix import DenseMatrix, as_dense
from htreg.errors import DegenerateDataError, ParameterError, ShapeError

if TYPE_CHECKING:
    from htreg.vicm.models import VicmData, VicmSample

logger = logging.getLogger(__name__)

DEFAULT_CALIBRATION_FACTOR = 10.0
BISECTION_MAX_ITER = 200
# Internal stopping tolerance; the public contract is 1e-6 * target.
_BISECTION_RTOL = 1e-11
RESIDUAL_RTOL = 1e-6


def psi(x: Union[float, ArrayLike], tau: Union[float, ArrayLike]):
    """Truncate ``x`` to ``[-tau, tau]`` keeping its sign.

    Works element-wise on arrays; returns a float for scalar input.

    Raises:
        ParameterError: If any tau is not strictly positive.
    """
    tau_arr = np.asarray(tau, dtype=np.float64)
    if np.any(~(tau_arr > 0)):
        raise ParameterError(f"truncation level must be positive, got {tau}")
    out = np.clip(np.asarray(x, dtype=np.float64), -tau_arr, tau_arr)
    if out.ndim == 0:
        return float(out)
    return out


def soft_threshold(x: ArrayLike, threshold: Union[float, ArrayLike]) -> NDArray[np.float64]:
    """sign(x) * max(|x| - threshold, 0), element-wise."""
    arr = np.asarray(x, dtype=np.float64)
    return np.sign(arr) * np.maximum(np.abs(arr) - threshold, 0.0)


@dataclass(frozen=True)
class TruncationMatrix:
    """One strictly positive, finite truncation level per entry position."""

    levels: DenseMatrix

    def __post_init__(self):
        levels = as_dense(self.levels, "truncation levels")
        if np.any(levels <= 0):
            raise ParameterError("truncation levels must be strictly positive")
        object.__setattr__(self, "levels", levels)

    @classmethod
    def constant(cls, rows: int, cols: int, value: float) -> "TruncationMatrix":
        return cls(np.full((rows, cols), float(value)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.levels.shape


def psi_matrix(m: ArrayLike, levels: TruncationMatrix) -> DenseMatrix:
    """Apply psi entry-wise with the matching level."""
    arr = as_dense(m)
    if arr.shape != levels.shape:
        raise ShapeError(f"matrix shape {arr.shape} does not match levels {levels.shape}")
    return np.clip(arr, -levels.levels, levels.levels)


@dataclass(frozen=True)
class TauCalibration:
    """Solution of one adaptive truncation equation."""

    tau: float
    target: float
    residual: float
    saturated: bool


@dataclass(frozen=True)
class ColumnCalibration:
    """Column-wise solutions of the adaptive equation (vectorized form)."""

    tau: NDArray[np.float64]
    residual: NDArray[np.float64]
    saturated: NDArray[np.bool_]
    target: float


def truncation_ratio(values: ArrayLike, tau: Union[float, ArrayLike]) -> NDArray[np.float64]:
    """sum_i psi_tau(x_i)^2 / tau^2 along axis 0."""
    a = np.abs(np.asarray(values, dtype=np.float64))
    ratio = np.minimum(a / tau, 1.0)
    return np.sum(ratio * ratio, axis=0)


def calibrate_columns(values: ArrayLike, target: float) -> ColumnCalibration:
    """Solve the adaptive equation independently for every column of ``values``.

    ``values`` has shape ``(n, m)``; the map tau -> sum psi_tau^2 / tau^2 is
    non-increasing, so a geometric bisection between
    ``1e-12 * min nonzero |x|`` and the upper bracket converges. When the
    untruncated solution ``sqrt(sum x^2 / target)`` already exceeds
    ``max |x|`` it is exact and returned directly.

    Columns whose nonzero count does not exceed ``target`` have no finite
    solution; they return ``max |x|`` flagged saturated.

    Raises:
        ParameterError: If target is not positive.
        DegenerateDataError: If a column is identically zero.
    """
    if not target > 0:
        raise ParameterError(f"calibration target must be positive, got {target}")
    a = np.abs(np.asarray(values, dtype=np.float64))
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] == 0:
        raise ParameterError(f"calibration values must be a non-empty (n, m) array, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ParameterError("calibration values must be finite")

    nonzero = np.count_nonzero(a, axis=0)
    empty = np.flatnonzero(nonzero == 0)
    if empty.size:
        raise DegenerateDataError(
            "all calibration values are zero", cells=[(int(k),) for k in empty]
        )

    amax = a.max(axis=0)
    sumsq = np.sum(a * a, axis=0)
    saturated = nonzero <= target
    tau = np.array(amax, copy=True)

    closed = np.sqrt(sumsq / target)
    exact = ~saturated & (closed >= amax)
    tau[exact] = closed[exact]

    active = np.flatnonzero(~saturated & ~exact)
    if active.size:
        sub = a[:, active]
        min_nonzero = np.where(sub > 0, sub, np.inf).min(axis=0)
        lo = min_nonzero * 1e-12
        hi = amax[active].copy()
        mid = np.sqrt(lo * hi)
        for _ in range(BISECTION_MAX_ITER):
            mid = np.sqrt(lo * hi)
            f = truncation_ratio(sub, mid)
            above = f > target
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
            if np.all(np.abs(f - target) <= _BISECTION_RTOL * target):
                break
        tau[active] = mid

    residual = np.abs(truncation_ratio(a, tau) - target)
    residual[saturated] = np.abs(nonzero[saturated] - target)
    unsolved = ~saturated & (residual > RESIDUAL_RTOL * target)
    if np.any(unsolved):
        logger.warning(
            f"calibration residual above {RESIDUAL_RTOL:g}*target in "
            f"{int(unsolved.sum())} column(s); max residual {residual[unsolved].max():.3g}"
        )
    if np.any(saturated):
        logger.warning(
            f"calibration target {target:.4g} >= nonzero count in {int(saturated.sum())} "
            "column(s); returning untruncated level max|x|"
        )
    return ColumnCalibration(tau=tau, residual=residual, saturated=saturated, target=float(target))


def calibrate_tau(values: Sequence[float] | ArrayLike, target: float) -> TauCalibration:
    """Find tau with sum_i psi_tau(x_i)^2 / tau^2 = target.

    Returns the level together with its equation residual and a saturation
    flag (set when target >= number of nonzero values, in which case
    tau = max|x| and no truncation happens).
    """
    col = calibrate_columns(np.asarray(values, dtype=np.float64).reshape(-1, 1), target)
    return TauCalibration(
        tau=float(col.tau[0]),
        target=col.target,
        residual=float(col.residual[0]),
        saturated=bool(col.saturated[0]),
    )


def vicm_targets(d1: int, d2: int, factor: float = DEFAULT_CALIBRATION_FACTOR) -> tuple[float, float]:
    """Default targets factor*log(d1*d2) for Gamma_1 and factor*log(d2) for Gamma_2."""
    return factor * math.log(d1 * d2), factor * math.log(d2)


@dataclass(frozen=True)
class VicmLevels:
    """Calibrated truncation matrices for the cross moment and the covariance."""

    gamma1: TruncationMatrix
    gamma2: TruncationMatrix
    residual1: DenseMatrix
    residual2: DenseMatrix
    saturated1: NDArray[np.bool_]
    saturated2: NDArray[np.bool_]
    target1: float
    target2: float


def _zero_product_cells(left: ArrayLike, right: ArrayLike) -> list[tuple[int, int]]:
    """(j, k) pairs where left[:, j] * right[:, k] is zero for every sample."""
    counts = (np.asarray(left) != 0).astype(np.int64).T @ (np.asarray(right) != 0).astype(np.int64)
    return [(int(j), int(k)) for j, k in np.argwhere(counts == 0)]


def calibrate_vicm_levels(
    samples: Union["VicmData", Sequence["VicmSample"]],
    score: str = "gaussian",
    *,
    score_nu: float = 5.0,
    target1: Optional[float] = None,
    target2: Optional[float] = None,
    factor: float = DEFAULT_CALIBRATION_FACTOR,
    threads: int = 1,
) -> VicmLevels:
    """Calibrate Gamma_1 (d1 x d2) and Gamma_2 (d2 x d2).

    Gamma_1[j, k] solves the adaptive equation over y_i * S(X_i)_j * z_ik
    with target factor*log(d1*d2); Gamma_2[k, s] over z_ik * z_is with
    target factor*log(d2). Rows of Gamma_1 are solved in parallel when
    ``threads > 1``.

    Raises:
        ParameterError: If fewer than 2 samples are given.
        DegenerateDataError: Listing every (j, k) or (k, s) coordinate whose
            products are all zero.
    """
    from htreg.vicm.models import VicmData
    from htreg.vicm.score import score_matrix

    data = VicmData.coerce(samples)
    if data.n < 2:
        raise ParameterError(f"calibration needs at least 2 samples, got {data.n}")
    default1, default2 = vicm_targets(data.d1, data.d2, factor)
    t1 = default1 if target1 is None else float(target1)
    t2 = default2 if target2 is None else float(target2)

    zero_cols = [int(k) for k in np.flatnonzero(~np.any(data.z != 0, axis=0))]
    if zero_cols:
        listed = ", ".join(str(k) for k in zero_cols)
        subject = f"column {listed} is" if len(zero_cols) == 1 else f"columns {listed} are"
        raise DegenerateDataError(
            f"Z {subject} identically zero", cells=[(k,) for k in zero_cols]
        )

    yz = data.y[:, None] * data.z  # (n, d2)
    sx = score_matrix(data.x, score, nu=score_nu)  # (n, d1)
    empty1 = _zero_product_cells(sx, yz)
    if empty1:
        raise DegenerateDataError("zero cross-moment products", cells=empty1)
    empty2 = _zero_product_cells(data.z, data.z)
    if empty2:
        raise DegenerateDataError("zero covariance products", cells=empty2)

    def _row(j: int) -> ColumnCalibration:
        return calibrate_columns(sx[:, j, None] * yz, t1)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_row, range(data.d1)))
    else:
        rows = [_row(j) for j in range(data.d1)]

    zz = (data.z[:, :, None] * data.z[:, None, :]).reshape(data.n, data.d2 * data.d2)
    cov = calibrate_columns(zz, t2)

    shape2 = (data.d2, data.d2)
    logger.debug(f"calibrated VICM levels for d1={data.d1}, d2={data.d2}, n={data.n}")
    return VicmLevels(
        gamma1=TruncationMatrix(np.vstack([r.tau for r in rows])),
        gamma2=TruncationMatrix(cov.tau.reshape(shape2)),
        residual1=np.vstack([r.residual for r in rows]),
        residual2=cov.residual.reshape(shape2),
        saturated1=np.vstack([r.saturated for r in rows]),
        saturated2=cov.saturated.reshape(shape2),
        target1=t1,
        target2=t2,
    )
