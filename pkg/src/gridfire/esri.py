"""Reader and writer for ESRI ASCII grids.

Header keys are case-insensitive. Values are written with Python's
shortest round-trip float repr so that write-then-read is bit-exact.
Row 0 of the returned array is the northernmost data line.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError

HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value")
DEFAULT_NODATA = -9999.0


@dataclass(frozen=True)
class EsriHeader:
    ncols: int
    nrows: int
    xllcorner: float
    yllcorner: float
    cellsize: float
    nodata_value: float = DEFAULT_NODATA

    def georef(self) -> tuple:
        """Fields that must agree for two rasters to be co-registered."""
        return (self.ncols, self.nrows, self.xllcorner, self.yllcorner, self.cellsize)


def _format_number(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def read_esri_ascii(path) -> tuple[EsriHeader, np.ndarray]:
    """Read a grid, returning its header and a float64 ``(nrows, ncols)`` array.

    NODATA cells are returned as-is; callers decide how to treat them.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="ascii")
    except FileNotFoundError:
        raise
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read grid: {exc}", path=path) from exc
    lines = text.splitlines()

    values = {}
    for lineno, key in enumerate(HEADER_KEYS, start=1):
        if lineno > len(lines):
            raise ParseError(f"truncated header, expected {key}", path=path, line=lineno)
        parts = lines[lineno - 1].split()
        if len(parts) != 2 or parts[0].lower() != key:
            raise ParseError(f"expected header '{key} <value>', got {lines[lineno - 1]!r}",
                             path=path, line=lineno)
        try:
            values[key] = float(parts[1])
        except ValueError:
            raise ParseError(f"bad {key} value {parts[1]!r}", path=path, line=lineno) from None

    ncols, nrows = values["ncols"], values["nrows"]
    if ncols != int(ncols) or nrows != int(nrows) or ncols < 1 or nrows < 1:
        raise ParseError(f"grid dimensions must be positive integers, got {nrows}x{ncols}",
                         path=path, line=1)
    header = EsriHeader(int(ncols), int(nrows), values["xllcorner"], values["yllcorner"],
                        values["cellsize"], values["nodata_value"])

    body = lines[6:]
    while body and not body[-1].strip():
        body.pop()
    if len(body) != header.nrows:
        raise ParseError(f"expected {header.nrows} data rows, found {len(body)}",
                         path=path, line=6 + len(body))
    data = np.empty((header.nrows, header.ncols), dtype=np.float64)
    for i, line in enumerate(body):
        tokens = line.split()
        if len(tokens) != header.ncols:
            raise ParseError(f"expected {header.ncols} values, found {len(tokens)}",
                             path=path, line=7 + i)
        try:
            data[i] = [float(t) for t in tokens]
        except ValueError:
            col = next(j for j, t in enumerate(tokens) if not _is_float(t))
            raise ParseError(f"non-numeric value {tokens[col]!r}", path=path, line=7 + i,
                             row=i, col=col) from None
    bad = ~np.isfinite(data)
    if bad.any():
        r, c = map(int, np.argwhere(bad)[0])
        raise ParseError("non-finite value", path=path, line=7 + r, row=r, col=c)
    return header, data


def _is_float(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def write_esri_ascii(path, header: EsriHeader, data: np.ndarray) -> None:
    data = np.asarray(data)
    if data.shape != (header.nrows, header.ncols):
        raise ValueError(f"array shape {data.shape} does not match header "
                         f"{header.nrows}x{header.ncols}")
    out = [
        f"ncols {header.ncols}",
        f"nrows {header.nrows}",
        f"xllcorner {repr(float(header.xllcorner))}",
        f"yllcorner {repr(float(header.yllcorner))}",
        f"cellsize {repr(float(header.cellsize))}",
        f"NODATA_value {_format_number(header.nodata_value)}",
    ]
    if np.issubdtype(data.dtype, np.integer) or np.issubdtype(data.dtype, np.bool_):
        out.extend(" ".join(map(str, row)) for row in data.astype(np.int64).tolist())
    else:
        out.extend(" ".join(_format_number(v) for v in row) for row in data.tolist())
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(out))
        fh.write("\n")
