"""TOML run configurations for the command-line tools.

Every file is parsed strictly: unknown keys and out-of-range values are
rejected at load time with the file path and the dotted field name.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Type, TypeVar

try:
    import tomllib  # Python 3.11+
except ImportError:
    import tomli as tomllib  # fallback for Python 3.10

import toml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from htreg.errors import ConfigError
from htreg.results import OutputFormat
from htreg.simlab.generators import VicmDesign
from htreg.simlab.plans import McPlan, VicmPlan, apply_scale_preset
from htreg.transforms import DEFAULT_CALIBRATION_FACTOR
from htreg.vicm.models import ScoreKind

ModelT = TypeVar("ModelT", bound=BaseModel)


class OutputOptions(BaseModel):
    """Where and how results are written."""

    model_config = ConfigDict(extra="forbid")

    path: Optional[Path] = None
    format: OutputFormat = "csv"


class McRunConfig(BaseModel):
    """``mc-experiment`` configuration file."""

    model_config = ConfigDict(extra="forbid")

    plan: McPlan = Field(default_factory=McPlan)
    output: OutputOptions = Field(default_factory=OutputOptions)
    threads: Optional[int] = Field(default=None, ge=1)

    @field_validator("plan", mode="before")
    @classmethod
    def _preset(cls, v: Any) -> Any:
        return apply_scale_preset("mc", v) if isinstance(v, Mapping) else v


class VicmRunConfig(BaseModel):
    """``vicm-experiment`` configuration file."""

    model_config = ConfigDict(extra="forbid")

    plan: VicmPlan = Field(default_factory=VicmPlan)
    output: OutputOptions = Field(default_factory=OutputOptions)
    threads: Optional[int] = Field(default=None, ge=1)

    @field_validator("plan", mode="before")
    @classmethod
    def _preset(cls, v: Any) -> Any:
        return apply_scale_preset("vicm", v) if isinstance(v, Mapping) else v


class CalibrateRunConfig(BaseModel):
    """``calibrate`` configuration file."""

    model_config = ConfigDict(extra="forbid")

    score_kind: ScoreKind = "gaussian"
    score_nu: float = Field(default=5.0, gt=0)
    target1: Optional[float] = Field(default=None, gt=0)
    target2: Optional[float] = Field(default=None, gt=0)
    factor: float = Field(default=DEFAULT_CALIBRATION_FACTOR, gt=0)
    output: OutputOptions = Field(default_factory=OutputOptions)
    threads: Optional[int] = Field(default=None, ge=1)


class DataRunConfig(BaseModel):
    """``generate-vicm-data`` configuration file."""

    model_config = ConfigDict(extra="forbid")

    n: int = Field(default=1000, ge=2)
    seed: Optional[int] = Field(default=None, ge=0, lt=2**64)
    design: VicmDesign = Field(default_factory=VicmDesign)
    path: Optional[Path] = None


def read_toml(path: Path) -> Dict[str, Any]:
    """Load a TOML file, mapping every failure to :class:`ConfigError`."""
    path = Path(path)
    if not path.exists():
        raise ConfigError("config file not found", path=str(path))
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"invalid TOML: {e}", path=str(path)) from e


def format_validation_error(e: ValidationError) -> tuple[str, str]:
    """(dotted field, message) of the first validation problem."""
    first = e.errors()[0]
    field = ".".join(str(part) for part in first["loc"]) or "<root>"
    return field, first["msg"]


def validate_config(model: Type[ModelT], data: Mapping[str, Any], path: Optional[Path] = None) -> ModelT:
    try:
        return model.model_validate(dict(data))
    except ValidationError as e:
        field, message = format_validation_error(e)
        extra = f" (and {e.error_count() - 1} more)" if e.error_count() > 1 else ""
        raise ConfigError(f"{message}{extra}", path=str(path) if path else None, field=field) from e


def load_run_config(model: Type[ModelT], path: Optional[Path]) -> ModelT:
    """Parse and validate ``path``; defaults only when no path is given."""
    if path is None:
        return validate_config(model, {})
    return validate_config(model, read_toml(path), path)


def dump_resolved_config(model: BaseModel, path: Path) -> Path:
    """Write the fully resolved configuration next to the results."""
    data = model.model_dump(mode="json", exclude_none=True, by_alias=True)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        toml.dump(data, f)
    return path


RESOURCES_DIR = Path(__file__).parent / "resources"


def bundled_config(name: str) -> Path:
    """Path of a configuration shipped with the package (e.g. 'mc_desk')."""
    path = RESOURCES_DIR / f"{name}.toml"
    if not path.exists():
        available = sorted(p.stem for p in RESOURCES_DIR.glob("*.toml"))
        raise ConfigError(f"no bundled config '{name}' (available: {', '.join(available)})")
    return path
