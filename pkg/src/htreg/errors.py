"""Exception hierarchy shared by all htreg modules."""

from typing import Optional, Sequence, Tuple


class HtRegError(Exception):
    """Base class for htreg failures."""


class ParameterError(HtRegError, ValueError):
    """A precondition on an input parameter was violated."""


class ShapeError(ParameterError):
    """Array dimensions do not agree."""


class DataError(ParameterError):
    """Malformed or out-of-range data.

    Carries the offending sample position (or file line) when known.
    """

    def __init__(self, message: str, position: Optional[int] = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class DegenerateDataError(HtRegError):
    """Calibration data carry no information (all values zero).

    ``cells`` lists every degenerate coordinate; ``cell`` is the first.
    """

    def __init__(
        self,
        message: str,
        cell: Optional[Tuple[int, ...]] = None,
        cells: Optional[Sequence[Tuple[int, ...]]] = None,
    ):
        if cells is None:
            cells = [cell] if cell is not None else []
        self.cells: Tuple[Tuple[int, ...], ...] = tuple(tuple(c) for c in cells)
        self.cell = self.cells[0] if self.cells else None
        if len(self.cells) == 1:
            message = f"{message} (cell {self.cells[0]})"
        elif self.cells:
            message = f"{message} (cells {', '.join(str(c) for c in self.cells)})"
        super().__init__(message)


class NumericalFailureError(HtRegError):
    """A numerical routine (SVD, Cholesky, LP) failed."""

    def __init__(self, message: str, shape: Optional[Tuple[int, ...]] = None):
        self.shape = shape
        if shape is not None:
            message = f"{message} (matrix {'x'.join(str(s) for s in shape)})"
        super().__init__(message)


class InfeasibleProgramError(NumericalFailureError):
    """A CLIME column program has an empty feasible set."""

    def __init__(self, column: int, gamma: float, detail: str = ""):
        self.column = column
        self.gamma = gamma
        message = f"CLIME column {column} is infeasible at gamma={gamma:g}"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class InsufficientDataError(ParameterError):
    """Too few distinct points for a fit."""


class ResultFormatError(DataError):
    """A result file does not follow the expected layout or schema."""


class ConfigError(ParameterError):
    """A run configuration file is missing, unreadable or invalid.

    The message names the file and, for schema violations, the dotted field.
    """

    def __init__(self, message: str, path: Optional[str] = None, field: Optional[str] = None):
        self.path = path
        self.field = field
        prefix = path or "<config>"
        if field:
            prefix = f"{prefix}: {field}"
        super().__init__(f"{prefix}: {message}")
