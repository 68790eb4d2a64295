"""Matrix-completion models: observations, configuration and solver outputs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, Sequence, Union

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from htreg.core.matrix import DenseMatrix
from htreg.errors import ShapeError


class McSample(BaseModel):
    """One observation y = sqrt(d1*d2) * Theta[row, col] + noise.

    The design X = sqrt(d1*d2) e_row e_col^T is stored implicitly by its
    (0-based) cell indices.
    """

    model_config = ConfigDict(frozen=True)

    row: int = Field(ge=0)
    col: int = Field(ge=0)
    response: float


@dataclass(frozen=True)
class McBatch:
    """Column-oriented storage for many observations."""

    rows: NDArray[np.int64]
    cols: NDArray[np.int64]
    responses: NDArray[np.float64]

    def __post_init__(self):
        if not (len(self.rows) == len(self.cols) == len(self.responses)):
            raise ShapeError("rows, cols and responses must have equal length")

    def __len__(self) -> int:
        return len(self.responses)

    def __iter__(self) -> Iterator[McSample]:
        for j, k, y in zip(self.rows, self.cols, self.responses):
            yield McSample(row=int(j), col=int(k), response=float(y))

    @classmethod
    def from_samples(cls, samples: Iterable[McSample]) -> "McBatch":
        items = list(samples)
        return cls(
            rows=np.array([s.row for s in items], dtype=np.int64),
            cols=np.array([s.col for s in items], dtype=np.int64),
            responses=np.array([s.response for s in items], dtype=np.float64),
        )

    @classmethod
    def coerce(cls, samples: Union["McBatch", Sequence[McSample]]) -> "McBatch":
        if isinstance(samples, McBatch):
            return samples
        return cls.from_samples(samples)


class AdmmConfig(BaseModel):
    """ADMM penalty and stopping rules."""

    model_config = ConfigDict(extra="forbid")

    rho: float = Field(default=1.0, gt=0)
    max_iter: int = Field(default=3000, ge=1)
    primal_tol: float = Field(default=1e-6, gt=0)
    dual_tol: float = Field(default=1e-6, gt=0)
    # Residual balancing: rescale rho by balance_factor when one residual
    # exceeds the other by balance_ratio.
    adaptive_rho: bool = True
    balance_ratio: float = Field(default=10.0, gt=1)
    balance_factor: float = Field(default=2.0, gt=1)


class McConfig(BaseModel):
    """Tuning inputs of the truncated matrix-completion estimator."""

    model_config = ConfigDict(extra="forbid")

    d1: int = Field(ge=1)
    d2: int = Field(ge=1)
    rank_bound: int = Field(default=1, ge=1)
    max_norm_budget: float = Field(ge=0, description="R, with ||Theta||_max <= R/sqrt(d1*d2)")
    moment_index: float = Field(gt=1, le=2, description="alpha")
    confidence: float = Field(default=1.01, gt=1, description="delta")
    tau_scale: float = Field(default=1.0, gt=0, description="C1")
    lambda_scale: float = Field(default=0.1, gt=0, description="C2")
    admm: AdmmConfig = Field(default_factory=AdmmConfig)

    @property
    def box(self) -> float:
        """Max-norm radius R / sqrt(d1*d2)."""
        return self.max_norm_budget / float(np.sqrt(self.d1 * self.d2))

    @model_validator(mode="after")
    def _rank_fits(self) -> "McConfig":
        if self.rank_bound > min(self.d1, self.d2):
            raise ValueError(
                f"rank_bound {self.rank_bound} exceeds min(d1, d2) = {min(self.d1, self.d2)}"
            )
        return self


@dataclass(frozen=True)
class McSufficientStats:
    """Per-cell observation counts and truncated response sums.

    counts[j, k] is the number of samples at (j, k) and truncated_sums[j, k]
    the sum of psi_tau(y) over them. tau may be +inf (no truncation).
    """

    counts: DenseMatrix
    truncated_sums: DenseMatrix
    n: int
    tau: float

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape


@dataclass(frozen=True)
class Schedule:
    """Truncation level and penalty chosen from the sample size."""

    tau: float
    lambda_: float
    tau_exponent: float
    lambda_exponent: float
    sample_size_ok: bool


@dataclass
class McSolution:
    """ADMM output.

    ``estimate`` is the low-rank iterate W; ``theta`` is the box-feasible
    iterate.
    """

    estimate: DenseMatrix
    theta: DenseMatrix
    converged: bool
    iterations: int
    primal_residual: float
    dual_residual: float
    rho: float
    objective: float
    objective_theta: float
    objective_history: List[float] = field(default_factory=list)
    objective_monotone: bool = True
