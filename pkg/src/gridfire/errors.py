"""Exception hierarchy shared by all pipeline stages.

Every error carries enough location detail (file path, line, or cell) to
find the defect without re-running anything.
"""

from __future__ import annotations


class GridfireError(Exception):
    """Base class for all pipeline errors."""

    exit_code = 2

    def __init__(self, message: str, *, path=None, line=None, row=None, col=None):
        self.path = None if path is None else str(path)
        self.line = line
        self.row = row
        self.col = col
        where = []
        if self.path is not None:
            where.append(self.path)
        if line is not None:
            where.append(f"line {line}")
        if row is not None and col is not None:
            where.append(f"cell (row={row}, col={col})")
        self.message = message
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


class OutOfBounds(GridfireError):
    pass


class ParseError(GridfireError):
    pass


class MissingLayer(GridfireError):
    pass


class HeaderMismatch(GridfireError):
    pass


class RangeViolation(GridfireError):
    pass


class NonMonotonicTimestamps(GridfireError):
    pass


class DanglingBusReference(GridfireError):
    pass


class DuplicateId(GridfireError):
    pass


class InvalidBranch(GridfireError):
    pass


class CoordinateOutOfRange(GridfireError):
    pass


class ZeroLengthBranch(GridfireError):
    pass


class EmptyWindow(GridfireError):
    pass


class IgnitionOutOfGrid(GridfireError):
    pass


class NonBinaryValue(GridfireError):
    pass


class GridMismatch(GridfireError):
    pass


class OrphanScenario(GridfireError):
    pass


class EmptyInput(GridfireError):
    pass


class UnknownScenario(GridfireError):
    pass
