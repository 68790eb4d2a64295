"""Plain-text VICM sample files.

Layout: a header line ``d1=<int> d2=<int>`` followed by one sample per
line, ``y x_1 .. x_d1 z_1 .. z_d2`` separated by whitespace. Blank lines
and lines starting with ``#`` are ignored.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from htreg.errors import DataError
from htreg.results import format_value
from htreg.vicm.models import VicmData

_HEADER = re.compile(r"^\s*d1\s*=\s*(\d+)\s+d2\s*=\s*(\d+)\s*$")


def read_vicm_file(path: Path) -> VicmData:
    """Parse a sample file; errors carry the 1-based line number."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    content = [
        (i, line) for i, line in enumerate(lines, 1) if line.strip() and not line.lstrip().startswith("#")
    ]
    if not content:
        raise DataError(f"{path}: data file is empty")
    header_line, header = content[0]
    match = _HEADER.match(header)
    if not match:
        raise DataError(f"{path}: expected header 'd1=<int> d2=<int>'", position=header_line)
    d1, d2 = int(match.group(1)), int(match.group(2))
    if d1 < 1 or d2 < 1:
        raise DataError(f"{path}: d1 and d2 must be positive", position=header_line)
    width = 1 + d1 + d2

    rows = []
    for lineno, line in content[1:]:
        fields = line.split()
        if len(fields) != width:
            raise DataError(
                f"{path}: expected {width} values (y, {d1} x, {d2} z), got {len(fields)}",
                position=lineno,
            )
        try:
            values = [float(v) for v in fields]
        except ValueError as e:
            raise DataError(f"{path}: {e}", position=lineno) from e
        if not np.all(np.isfinite(values)):
            raise DataError(f"{path}: non-finite value", position=lineno)
        rows.append(values)
    if not rows:
        raise DataError(f"{path}: no samples after the header")

    arr = np.array(rows, dtype=np.float64)
    return VicmData(y=arr[:, 0], x=arr[:, 1 : 1 + d1], z=arr[:, 1 + d1 :])


def write_vicm_file(path: Path, data: VicmData) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"d1={data.d1} d2={data.d2}\n")
        for i in range(data.n):
            values = [data.y[i], *data.x[i], *data.z[i]]
            f.write(" ".join(format_value(float(v)) for v in values) + "\n")
    return path
