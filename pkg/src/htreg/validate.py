"""Validation of result files and their side outputs."""

from __future__ import annotations

import json
from pathlib import Path
from typing import List, Optional

from htreg.errors import ResultFormatError
from htreg.results import ResultFile, read_result_file, side_path
from htreg.simlab.records import ExperimentRecord
from htreg.versioning import is_supported

# Required keys in a result header block
REQUIRED_HEADER_KEYS = {"schema_version", "package_version", "kind", "seed", "config"}


class ValidationError:
    """Represents a single validation error."""

    def __init__(self, file_path: str, message: str, line: Optional[int] = None):
        self.file_path = file_path
        self.message = message
        self.line = line

    def __str__(self) -> str:
        if self.line is not None:
            return f"{self.file_path}:{self.line}: {self.message}"
        return f"{self.file_path}: {self.message}"


class ValidationResult:
    """Result of a validation operation."""

    def __init__(self):
        self.errors: List[ValidationError] = []
        self.warnings: List[ValidationError] = []
        self.rows = 0

    @property
    def is_valid(self) -> bool:
        return len(self.errors) == 0

    def add_error(self, file_path: str, message: str, line: Optional[int] = None) -> None:
        self.errors.append(ValidationError(file_path, message, line))

    def add_warning(self, file_path: str, message: str, line: Optional[int] = None) -> None:
        self.warnings.append(ValidationError(file_path, message, line))

    def __str__(self) -> str:
        lines = []
        if self.errors:
            lines.append(f"Errors ({len(self.errors)}):")
            for err in self.errors:
                lines.append(f"  ❌ {err}")
        if self.warnings:
            lines.append(f"Warnings ({len(self.warnings)}):")
            for warn in self.warnings:
                lines.append(f"  ⚠️  {warn}")
        if self.is_valid and not self.warnings:
            lines.append(f"✅ Validation passed ({self.rows} rows)")
        return "\n".join(lines)


def _check_records(path: str, records: List[ExperimentRecord], result: ValidationResult) -> None:
    keys = [r.sort_key() for r in records]
    if keys != sorted(keys):
        result.add_error(path, "records are not in canonical sorted order")
    if len(set(keys)) != len(keys):
        result.add_error(path, "duplicate (estimator, noise, n, replicate) records")
    failed = sum(1 for r in records if r.failed)
    if failed:
        result.add_warning(path, f"{failed} record(s) failed numerically")
    unconverged = sum(1 for r in records if not r.converged and not r.failed)
    if unconverged:
        result.add_warning(path, f"{unconverged} record(s) did not converge")


def validate_summary_file(path: Path, result: ValidationResult) -> None:
    """Check the summary sidecar when it exists."""
    if not path.exists():
        return
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        result.add_error(str(path), f"Invalid JSON: {e}")
        return
    meta = data.get("meta", {})
    if not is_supported(meta.get("schema_version")):
        result.add_error(str(path), f"unsupported schema_version {meta.get('schema_version')!r}")
    for key in ("groups", "comparison"):
        if key not in data:
            result.add_error(str(path), f"missing '{key}'")


def validate_result_file(path: Path) -> ValidationResult:
    """Re-parse a result file and check header, rows and ordering."""
    path = Path(path)
    result = ValidationResult()
    if not path.exists():
        result.add_error(str(path), "File does not exist")
        return result
    try:
        parsed: ResultFile = read_result_file(path)
    except ResultFormatError as e:
        result.add_error(str(path), str(e), e.position)
        return result

    missing = REQUIRED_HEADER_KEYS - set(parsed.header)
    if missing:
        result.add_error(str(path), f"header missing keys: {sorted(missing)}")
    result.rows = len(parsed.rows)
    if not parsed.rows:
        result.add_warning(str(path), "file holds no rows")
    if parsed.kind != "calibration":
        _check_records(str(path), parsed.rows, result)
        validate_summary_file(side_path(path, ".summary.json"), result)
    return result
