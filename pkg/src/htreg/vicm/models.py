"""Varying index coefficient model: samples, configuration and fit results."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Iterator, List, Literal, Optional, Sequence, Union

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator

from htreg.core.matrix import DenseMatrix
from htreg.errors import ParameterError, ShapeError

if TYPE_CHECKING:
    from htreg.transforms import VicmLevels

ScoreKind = Literal["gaussian", "student_t"]
TuningMode = Literal["calibrated", "power_law"]


class VicmSample(BaseModel):
    """One triple (y, X, Z)."""

    model_config = ConfigDict(frozen=True)

    y: float
    x: List[float]
    z: List[float]

    @field_validator("x", "z")
    @classmethod
    def _finite(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("vector must be non-empty")
        if not all(np.isfinite(v)):
            raise ValueError("vector entries must be finite")
        return v


@dataclass(frozen=True)
class VicmData:
    """Row-stacked samples: y (n,), x (n, d1), z (n, d2)."""

    y: NDArray[np.float64]
    x: NDArray[np.float64]
    z: NDArray[np.float64]

    def __post_init__(self):
        if self.x.ndim != 2 or self.z.ndim != 2 or self.y.ndim != 1:
            raise ShapeError("VicmData expects y (n,), x (n, d1), z (n, d2)")
        if not (len(self.y) == len(self.x) == len(self.z)):
            raise ShapeError(
                f"sample counts differ: y={len(self.y)}, x={len(self.x)}, z={len(self.z)}"
            )
        for name, arr in (("y", self.y), ("x", self.x), ("z", self.z)):
            if not np.all(np.isfinite(arr)):
                raise ParameterError(f"{name} has non-finite entries")

    @property
    def n(self) -> int:
        return len(self.y)

    @property
    def d1(self) -> int:
        return self.x.shape[1]

    @property
    def d2(self) -> int:
        return self.z.shape[1]

    def __len__(self) -> int:
        return self.n

    def __iter__(self) -> Iterator[VicmSample]:
        for i in range(self.n):
            yield VicmSample(y=float(self.y[i]), x=self.x[i].tolist(), z=self.z[i].tolist())

    @classmethod
    def from_samples(cls, samples: Iterable[VicmSample]) -> "VicmData":
        items = list(samples)
        if not items:
            raise ParameterError("no samples given")
        d1, d2 = len(items[0].x), len(items[0].z)
        for i, s in enumerate(items):
            if len(s.x) != d1 or len(s.z) != d2:
                raise ShapeError(f"sample {i} has dimensions ({len(s.x)}, {len(s.z)}), expected ({d1}, {d2})")
        return cls(
            y=np.array([s.y for s in items], dtype=np.float64),
            x=np.array([s.x for s in items], dtype=np.float64),
            z=np.array([s.z for s in items], dtype=np.float64),
        )

    @classmethod
    def coerce(cls, samples: Union["VicmData", Sequence[VicmSample]]) -> "VicmData":
        if isinstance(samples, VicmData):
            return samples
        return cls.from_samples(samples)


class VicmConfig(BaseModel):
    """Tuning inputs of the element-wise truncated estimator."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    d1: int = Field(ge=1)
    d2: int = Field(ge=1)
    score_kind: ScoreKind = "gaussian"
    score_nu: float = Field(default=5.0, gt=0)
    clime_gamma: float = Field(gt=0)
    lambda_: float = Field(default=0.0, ge=0, alias="lambda")
    # False gives the standard (untruncated) procedure
    truncate: bool = True
    tuning: TuningMode = "calibrated"
    calibration_factor: float = Field(default=10.0, gt=0)
    target1: Optional[float] = Field(default=None, gt=0)
    target2: Optional[float] = Field(default=None, gt=0)
    # power_law scales: tau1 = c1 sqrt(n / log(d1 d2)), tau2 = c2 sqrt(n / log d2)
    tau1_scale: float = Field(default=1.0, gt=0)
    tau2_scale: float = Field(default=1.0, gt=0)
    omega_l1_bound: Optional[float] = Field(default=None, gt=0)
    threads: int = Field(default=1, ge=1)


@dataclass
class VicmFit:
    """Everything the estimator computed along the way."""

    theta_hat: DenseMatrix
    omega_hat: DenseMatrix
    moment_matrix: DenseMatrix
    covariance: DenseMatrix
    a_matrix: DenseMatrix
    levels: Optional["VicmLevels"] = None
