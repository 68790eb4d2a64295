"""Experiment plans.

Plans default to desk scale. ``scale = "full"`` swaps in the larger grids
before the user's own values are applied, so explicit keys still win.
"""

from __future__ import annotations

import logging
from typing import Any, Dict, List, Literal, Mapping, Optional, Type, TypeVar

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from htreg.matcomp.models import AdmmConfig
from htreg.simlab.generators import VicmDesign
from htreg.simlab.records import EstimatorKind
from htreg.vicm.models import ScoreKind, TuningMode

logger = logging.getLogger(__name__)

Scale = Literal["desk", "full"]

# Offset subtracted from the noise degrees of freedom to get the moment index.
ALPHA_OFFSET = 0.01


class NoiseSpec(BaseModel):
    """scale * t_nu noise; scale 0 means noiseless."""

    model_config = ConfigDict(extra="forbid")

    nu: float = Field(gt=0)
    scale: float = Field(ge=0)
    label: Optional[str] = None
    # moment index used by the schedule; defaults to min(nu - 0.01, 2)
    alpha: Optional[float] = Field(default=None, gt=1)

    @property
    def tag(self) -> str:
        if self.label:
            return self.label
        if self.scale == 0:
            return "none"
        return f"t{self.nu:g}x{self.scale:g}"

    @property
    def moment_index(self) -> float:
        if self.alpha is not None:
            return self.alpha
        if self.scale == 0:
            return 2.0
        return min(self.nu - ALPHA_OFFSET, 2.0)

    @model_validator(mode="after")
    def _alpha_above_one(self) -> "NoiseSpec":
        if self.alpha is None and self.scale > 0 and self.nu - ALPHA_OFFSET <= 1:
            raise ValueError(
                f"nu={self.nu} gives moment index <= 1; set alpha explicitly or use nu > 1.01"
            )
        return self


def _default_noises() -> List[NoiseSpec]:
    return [
        NoiseSpec(nu=2.0, scale=1 / 5, label="t2/5"),
        NoiseSpec(nu=1.5, scale=1 / 10, label="t1.5/10"),
        NoiseSpec(nu=1.1, scale=1 / 15, label="t1.1/15"),
    ]


def _sorted_grid(v: List[int]) -> List[int]:
    if not v:
        raise ValueError("n_grid must not be empty")
    if any(n < 1 for n in v):
        raise ValueError("n_grid values must be positive")
    return sorted(set(v))


class McPlan(BaseModel):
    """Matrix-completion phase-transition experiment."""

    model_config = ConfigDict(extra="forbid")

    experiment_id: str = "mc"
    scale: Scale = "desk"
    seed: Optional[int] = Field(default=None, ge=0, lt=2**64)
    d1: int = Field(default=20, ge=1)
    d2: int = Field(default=20, ge=1)
    rank: int = Field(default=5, ge=1)
    n_vectors: int = Field(default=100, ge=2)
    n_grid: List[int] = Field(default_factory=lambda: [2000, 4000, 8000, 16000, 32000])
    replicates: int = Field(default=20, ge=1)
    noises: List[NoiseSpec] = Field(default_factory=_default_noises, min_length=1)
    estimators: List[EstimatorKind] = Field(default_factory=lambda: ["robust", "standard"])
    # C1, C2, L_alpha and delta of the schedule
    tau_scale: float = Field(default=1.0, gt=0)
    lambda_scale: float = Field(default=0.1, gt=0)
    l_alpha: float = Field(default=1.0, gt=0)
    confidence: float = Field(default=1.01, gt=1)
    # R; omitted means the oracle sqrt(d1 d2) ||Theta*||_max
    max_norm_budget: Optional[float] = Field(default=None, ge=0)
    # fixed overrides of the scheduled values
    tau_value: Optional[float] = Field(default=None, gt=0)
    lambda_value: Optional[float] = Field(default=None, ge=0)
    admm: AdmmConfig = Field(default_factory=AdmmConfig)
    include_timings: bool = False

    @field_validator("n_grid")
    @classmethod
    def _grid(cls, v: List[int]) -> List[int]:
        return _sorted_grid(v)

    @model_validator(mode="after")
    def _shape(self) -> "McPlan":
        if self.rank > min(self.d1, self.d2):
            raise ValueError(f"rank {self.rank} exceeds min(d1, d2) = {min(self.d1, self.d2)}")
        if self.d1 != self.d2:
            raise ValueError("the low-rank target is square; d1 must equal d2")
        if not self.estimators:
            raise ValueError("at least one estimator is required")
        tags = [noise.tag for noise in self.noises]
        if len(set(tags)) != len(tags):
            raise ValueError(f"noise tags must be unique, got {tags}")
        return self


class VicmPlan(BaseModel):
    """Robust vs standard direction estimation experiment."""

    model_config = ConfigDict(extra="forbid")

    experiment_id: str = "vicm"
    scale: Scale = "desk"
    seed: Optional[int] = Field(default=None, ge=0, lt=2**64)
    design: VicmDesign = Field(default_factory=lambda: VicmDesign(d1=50))
    n_grid: List[int] = Field(default_factory=lambda: [2500, 5000, 10000, 20000])
    replicates: int = Field(default=10, ge=1)
    estimators: List[EstimatorKind] = Field(default_factory=lambda: ["robust", "standard"])
    # score of X; defaults to the design's own distribution
    score_kind: Optional[ScoreKind] = None
    score_nu: Optional[float] = Field(default=None, gt=0)
    tuning: TuningMode = "calibrated"
    calibration_factor: float = Field(default=10.0, gt=0)
    tau1_scale: float = Field(default=1.0, gt=0)
    tau2_scale: float = Field(default=1.0, gt=0)
    # gamma = gamma_scale sqrt(log d2 / n)
    gamma_scale: float = Field(default=1.0, gt=0)
    # penalties lambda = c sqrt(log(d1 d2) / n) for c in the grid, picked by rho
    lambda_grid: List[float] = Field(default_factory=lambda: [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0])
    lambda_value: Optional[float] = Field(default=None, ge=0)
    include_timings: bool = False

    @field_validator("n_grid")
    @classmethod
    def _grid(cls, v: List[int]) -> List[int]:
        return _sorted_grid(v)

    @field_validator("lambda_grid")
    @classmethod
    def _lambda_grid(cls, v: List[float]) -> List[float]:
        if not v or any(c < 0 for c in v):
            raise ValueError("lambda_grid must be a non-empty list of non-negative scales")
        return v

    @model_validator(mode="after")
    def _estimators(self) -> "VicmPlan":
        if not self.estimators:
            raise ValueError("at least one estimator is required")
        if self.design.d2 < 2:
            raise ValueError("d2 must be at least 2 for the gamma and lambda schedules")
        return self

    @property
    def resolved_score(self) -> ScoreKind:
        if self.score_kind is not None:
            return self.score_kind
        return "gaussian" if self.design.design == "gaussian" else "student_t"

    @property
    def resolved_score_nu(self) -> float:
        return self.score_nu if self.score_nu is not None else self.design.x_nu

    @property
    def noise_tag(self) -> str:
        d = self.design
        if d.noise_scale == 0:
            return "none"
        return f"t{d.noise_nu:g}"


FULL_SCALE: Dict[str, Dict[str, Any]] = {
    "mc": {
        "d1": 100,
        "d2": 100,
        "n_grid": [2000, 4000, 8000, 16000],
        "replicates": 200,
    },
    "vicm": {
        "design": {"d1": 200},
        "n_grid": [2500, 5000, 10000, 15000, 20000, 25000, 30000, 35000],
        "replicates": 50,
    },
}

PlanT = TypeVar("PlanT", McPlan, VicmPlan)


def _merge(base: Dict[str, Any], override: Mapping[str, Any]) -> Dict[str, Any]:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def apply_scale_preset(kind: str, data: Mapping[str, Any]) -> Dict[str, Any]:
    """Raw plan data with the full-scale preset underneath when requested."""
    if data.get("scale") != "full":
        return dict(data)
    logger.warning(
        f"full-scale {kind} plan requested; expect a runtime of hours rather than minutes"
    )
    return _merge(FULL_SCALE[kind], data)


def load_plan(cls: Type[PlanT], data: Mapping[str, Any]) -> PlanT:
    """Validate ``data`` into a plan, applying the full-scale preset if requested."""
    kind = "mc" if cls is McPlan else "vicm"
    return cls.model_validate(apply_scale_preset(kind, data))
