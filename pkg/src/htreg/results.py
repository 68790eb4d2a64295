"""Result files: CSV and JSON-lines writers and readers, summaries and reports.

Both formats start with a header block (schema version, package version,
kind, seed, resolved config). CSV carries it as ``# key: <json>`` comment
lines, JSON-lines as a first ``{"header": {...}}`` line. CSV floats are
written with 17 significant digits, so identical runs give identical bytes
and every file parses back into the records it was written from.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Union

import numpy as np
from jinja2 import Template
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from htreg.errors import ResultFormatError
from htreg.simlab.records import ExperimentRecord, ExperimentSummary, sort_records
from htreg.transforms import VicmLevels
from htreg.versioning import RESULT_KINDS, inject_meta, is_supported

OutputFormat = Literal["csv", "json-lines"]
OUTPUT_FORMATS = ("csv", "json-lines")

RECORD_FIELDS = [
    "experiment_id",
    "estimator",
    "noise",
    "n",
    "replicate",
    "error",
    "converged",
    "tau",
    "lambda",
    "note",
]
TIMING_FIELD = "wall_time_s"

CALIBRATION_FIELDS = ["matrix", "row", "col", "tau", "residual", "saturated", "target"]


class CalibrationRow(BaseModel):
    """One entry of a calibrated truncation matrix."""

    model_config = ConfigDict(extra="forbid")

    matrix: Literal["gamma1", "gamma2"]
    row: int = Field(ge=0)
    col: int = Field(ge=0)
    tau: float = Field(gt=0)
    residual: float = Field(ge=0)
    saturated: bool
    target: float = Field(gt=0)


ResultRow = Union[ExperimentRecord, CalibrationRow]


@dataclass
class ResultFile:
    """Parsed result file."""

    header: Dict[str, Any]
    rows: List[Any]
    format: OutputFormat

    @property
    def kind(self) -> str:
        return self.header["kind"]


def format_value(value: Any) -> str:
    """CSV cell text: 17 significant digits for floats, '' for None."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    return str(value)


def _dump_json(value: Any) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"))


def calibration_rows(levels: VicmLevels) -> List[CalibrationRow]:
    """Flatten Gamma_1 and Gamma_2 with their residuals into sorted rows."""
    rows: List[CalibrationRow] = []
    for name, gamma, residual, saturated, target in (
        ("gamma1", levels.gamma1, levels.residual1, levels.saturated1, levels.target1),
        ("gamma2", levels.gamma2, levels.residual2, levels.saturated2, levels.target2),
    ):
        tau = gamma.levels
        for j in range(tau.shape[0]):
            for k in range(tau.shape[1]):
                rows.append(
                    CalibrationRow(
                        matrix=name,
                        row=j,
                        col=k,
                        tau=float(tau[j, k]),
                        residual=float(residual[j, k]),
                        saturated=bool(saturated[j, k]),
                        target=float(target),
                    )
                )
    return rows


def _row_dicts(rows: Sequence[ResultRow]) -> tuple[List[str], List[Dict[str, Any]]]:
    if rows and isinstance(rows[0], CalibrationRow):
        ordered = sorted(rows, key=lambda r: (r.matrix, r.row, r.col))
        return CALIBRATION_FIELDS, [r.model_dump() for r in ordered]
    records = sort_records(rows)  # type: ignore[arg-type]
    fields = list(RECORD_FIELDS)
    if any(r.wall_time_s is not None for r in records):
        fields.append(TIMING_FIELD)
    dicts = [r.model_dump(by_alias=True) for r in records]
    return fields, [{k: d[k] for k in fields} for d in dicts]


def write_result_file(
    path: Path,
    header: Dict[str, Any],
    rows: Sequence[ResultRow],
    fmt: OutputFormat = "csv",
) -> Path:
    """Write ``rows`` below ``header`` in the chosen format."""
    if fmt not in OUTPUT_FORMATS:
        raise ResultFormatError(f"unknown output format '{fmt}'")
    fields, dicts = _row_dicts(rows)
    buf = io.StringIO()
    if fmt == "csv":
        for key, value in header.items():
            buf.write(f"# {key}: {_dump_json(value)}\n")
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for d in dicts:
            writer.writerow({k: format_value(d[k]) for k in fields})
    else:
        buf.write(_dump_json({"header": header}) + "\n")
        for d in dicts:
            buf.write(_dump_json(d) + "\n")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(buf.getvalue())
    return path


def _parse_csv(path: Path, lines: List[str]) -> tuple[Dict[str, Any], List[Dict[str, Any]]]:
    header: Dict[str, Any] = {}
    body_start = 0
    for i, line in enumerate(lines):
        if not line.startswith("#"):
            body_start = i
            break
        key, sep, raw = line[1:].strip().partition(": ")
        if not sep:
            raise ResultFormatError(f"{path}: malformed header line", position=i + 1)
        try:
            header[key] = json.loads(raw)
        except json.JSONDecodeError as e:
            raise ResultFormatError(f"{path}: header '{key}' is not JSON: {e}", position=i + 1)
    else:
        body_start = len(lines)
    reader = csv.DictReader(lines[body_start:])
    rows = [{k: v for k, v in row.items() if v != ""} for row in reader]
    return header, rows


def _parse_jsonl(path: Path, lines: List[str]) -> tuple[Dict[str, Any], List[Dict[str, Any]]]:
    parsed: List[Dict[str, Any]] = []
    for i, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            parsed.append(json.loads(line))
        except json.JSONDecodeError as e:
            raise ResultFormatError(f"{path}: invalid JSON: {e}", position=i)
    if not parsed or "header" not in parsed[0]:
        raise ResultFormatError(f"{path}: first line must hold the header block")
    rows = [{k: v for k, v in row.items() if v is not None} for row in parsed[1:]]
    return parsed[0]["header"], rows


def read_result_file(path: Path) -> ResultFile:
    """Parse a CSV or JSON-lines result file back into typed rows.

    Raises:
        ResultFormatError: On an empty file, a missing or unsupported
            header, or rows that do not validate.
    """
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise ResultFormatError(f"{path}: file is empty")
    if lines[0].startswith("#"):
        fmt: OutputFormat = "csv"
        header, raw_rows = _parse_csv(path, lines)
    else:
        fmt = "json-lines"
        header, raw_rows = _parse_jsonl(path, lines)

    for key in ("schema_version", "kind"):
        if key not in header:
            raise ResultFormatError(f"{path}: header is missing '{key}'")
    if not is_supported(header["schema_version"]):
        raise ResultFormatError(
            f"{path}: unsupported schema_version {header['schema_version']!r}"
        )
    kind = header["kind"]
    if kind not in RESULT_KINDS:
        raise ResultFormatError(f"{path}: unknown result kind {kind!r}")

    model = CalibrationRow if RESULT_KINDS[kind] == "calibration" else ExperimentRecord
    rows: List[Any] = []
    for i, raw in enumerate(raw_rows, 1):
        try:
            rows.append(model.model_validate(raw))
        except ValidationError as e:
            raise ResultFormatError(f"{path}: row {i} is invalid: {e}", position=i) from e
    return ResultFile(header=header, rows=rows, format=fmt)


def read_records(path: Path) -> List[ExperimentRecord]:
    result = read_result_file(path)
    if RESULT_KINDS[result.kind] != "experiment":
        raise ResultFormatError(f"{path}: expected experiment records, found '{result.kind}'")
    return result.rows


def read_calibration(path: Path) -> List[CalibrationRow]:
    result = read_result_file(path)
    if result.kind != "calibration":
        raise ResultFormatError(f"{path}: expected calibration rows, found '{result.kind}'")
    return result.rows


def side_path(out: Path, suffix: str) -> Path:
    """``results/run.csv`` -> ``results/run<suffix>``."""
    return out.with_name(out.stem + suffix)


def _finite(value: Optional[float]) -> Optional[float]:
    if value is None or not math.isfinite(value):
        return None
    return value


def write_summary(path: Path, summary: ExperimentSummary, header: Dict[str, Any]) -> Path:
    """Summary JSON: per-group slopes and the robust-vs-standard table."""
    data = inject_meta(summary.model_dump(mode="json"), header)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


REPORT_TEMPLATE = Template("""# {{ summary.experiment_id }} ({{ header.kind }}, {{ header.scale or "custom" }} scale)

Seed: {{ header.seed }}. Package {{ header.package_version }}, schema {{ header.schema_version }}.

## Fitted rates

| estimator | noise | points | slope | R^2 | predicted slope | non-converged | failed |
|---|---|---|---|---|---|---|---|
{% for g in summary.groups -%}
| {{ g.estimator }} | {{ g.noise }} | {{ g.n | length }} | {{ fmt(g.slope) }} | {{ fmt(g.r_squared) }} | {{ fmt(g.theoretical_slope) }} | {{ g.non_converged }} | {{ g.failed }} |
{% endfor %}
## Mean error by sample size
{% for g in summary.groups %}
### {{ g.estimator }}, {{ g.noise }}

| n | mean error | replicates |
|---|---|---|
{% for i in range(g.n | length) -%}
| {{ g.n[i] }} | {{ fmt(g.mean_error[i]) }} | {{ g.replicates[i] }} |
{% endfor %}
{%- endfor %}
{% if summary.comparison %}
## Robust vs standard

| noise | n | robust | standard | ratio |
|---|---|---|---|---|
{% for c in summary.comparison -%}
| {{ c.noise }} | {{ c.n }} | {{ fmt(c.robust) }} | {{ fmt(c.standard) }} | {{ fmt(c.ratio) }} |
{% endfor %}
{%- endif %}
""")


def _fmt(value: Optional[float]) -> str:
    value = _finite(value)
    return "n/a" if value is None else f"{value:.4g}"


def render_report(summary: ExperimentSummary, header: Dict[str, Any]) -> str:
    return REPORT_TEMPLATE.render(summary=summary, header=header, fmt=_fmt)


def write_report(path: Path, summary: ExperimentSummary, header: Dict[str, Any]) -> Path:
    with open(path, "w", encoding="utf-8") as f:
        f.write(render_report(summary, header))
    return path
