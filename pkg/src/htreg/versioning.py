"""Schema versions and header blocks for result files."""

from typing import Any, Dict, Optional

from htreg import __version__

# Package version
PACKAGE_VERSION = __version__

# Bumped whenever a column, header key or record field changes meaning
SCHEMA_VERSION = "1"
SUPPORTED_SCHEMA_VERSIONS = frozenset({"1"})

# Kinds of result files and the record type each one holds
RESULT_KINDS: Dict[str, str] = {
    "mc": "experiment",
    "vicm": "experiment",
    "calibration": "calibration",
}


def create_header(
    kind: str,
    config: Dict[str, Any],
    seed: Optional[int] = None,
    scale_label: Optional[str] = None,
) -> Dict[str, Any]:
    """Header block written at the top of every result file.

    Args:
        kind: One of RESULT_KINDS
        config: Fully resolved configuration (plain JSON types)
        seed: Root seed of the run, if any
        scale_label: "desk" or "full" for experiment runs

    Returns:
        Dict with schema and package versions, kind, seed and config
    """
    if kind not in RESULT_KINDS:
        raise ValueError(f"unknown result kind '{kind}'")
    header: Dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "package_version": PACKAGE_VERSION,
        "kind": kind,
        "seed": seed,
    }
    if scale_label is not None:
        header["scale"] = scale_label
    header["config"] = config
    return header


def inject_meta(json_data: Dict[str, Any], header: Dict[str, Any]) -> Dict[str, Any]:
    """Copy of ``json_data`` with the run header attached under 'meta'."""
    result = dict(json_data)
    result["meta"] = {k: v for k, v in header.items() if k != "config"}
    return result


def is_supported(schema_version: Any) -> bool:
    return str(schema_version) in SUPPORTED_SCHEMA_VERSIONS
