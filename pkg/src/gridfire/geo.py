"""Georeferencing primitives: grid projection, distances, interpolation and
line rasterization.

The grid uses a plate carree (equirectangular) mapping of its lat/lon
bounding box. Row 0 is the northernmost band, column 0 the westernmost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import OutOfBounds

EARTH_RADIUS_MILES = 3958.7613


@dataclass(frozen=True)
class GeoGrid:
    nrows: int
    ncols: int
    cellsize_m: float
    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float

    def __post_init__(self):
        if self.nrows < 1 or self.ncols < 1:
            raise ValueError(f"grid needs at least one row and column, got {self.nrows}x{self.ncols}")
        if not self.cellsize_m > 0:
            raise ValueError(f"cellsize_m must be positive, got {self.cellsize_m}")
        if not self.lat_min < self.lat_max:
            raise ValueError("lat_min must be below lat_max")
        if not self.lon_min < self.lon_max:
            raise ValueError("lon_min must be below lon_max")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def n_cells(self) -> int:
        return self.nrows * self.ncols

    def contains(self, p: "GeoPoint") -> bool:
        return self.lat_min <= p.lat <= self.lat_max and self.lon_min <= p.lon <= self.lon_max

    def cell_center(self, row: int, col: int) -> "GeoPoint":
        lat = self.lat_max - (row + 0.5) / self.nrows * (self.lat_max - self.lat_min)
        lon = self.lon_min + (col + 0.5) / self.ncols * (self.lon_max - self.lon_min)
        return GeoPoint(lat, lon)


class GeoPoint(NamedTuple):
    lat: float
    lon: float


class CellIndex(NamedTuple):
    row: int
    col: int


def _fractional(lat: float, lon: float, g: GeoGrid) -> tuple[float, float]:
    """(x, y) in cell units: x grows eastward from lon_min, y southward from lat_max."""
    x = (lon - g.lon_min) / (g.lon_max - g.lon_min) * g.ncols
    y = (g.lat_max - lat) / (g.lat_max - g.lat_min) * g.nrows
    return x, y


def _cell_of(x: float, y: float, g: GeoGrid) -> CellIndex:
    col = min(max(math.floor(x), 0), g.ncols - 1)
    row = min(max(math.floor(y), 0), g.nrows - 1)
    return CellIndex(row, col)


def project(p: GeoPoint, g: GeoGrid) -> CellIndex:
    """Map a point to the grid cell containing it.

    Points on the closed bounding box are accepted; the max-lat/max-lon
    edges clamp into the last valid cell.

    Raises:
        OutOfBounds: if the point lies outside the bounding box.
    """
    if not g.contains(p):
        raise OutOfBounds(f"point ({p.lat}, {p.lon}) outside grid bounds "
                          f"lat [{g.lat_min}, {g.lat_max}], lon [{g.lon_min}, {g.lon_max}]")
    x, y = _fractional(p.lat, p.lon, g)
    return _cell_of(x, y, g)


def project_many(lats, lons, g: GeoGrid):
    """Vectorized :func:`project`.

    Returns ``(rows, cols, inside)``; rows/cols are only meaningful where
    ``inside`` is true.
    """
    lats = np.asarray(lats, dtype=np.float64)
    lons = np.asarray(lons, dtype=np.float64)
    inside = (lats >= g.lat_min) & (lats <= g.lat_max) & (lons >= g.lon_min) & (lons <= g.lon_max)
    x = (lons - g.lon_min) / (g.lon_max - g.lon_min) * g.ncols
    y = (g.lat_max - lats) / (g.lat_max - g.lat_min) * g.nrows
    cols = np.clip(np.floor(x), 0, g.ncols - 1).astype(np.int64)
    rows = np.clip(np.floor(y), 0, g.nrows - 1).astype(np.int64)
    return rows, cols, inside


def haversine_miles(a: GeoPoint, b: GeoPoint) -> float:
    lat1, lon1, lat2, lon2 = map(math.radians, (a.lat, a.lon, b.lat, b.lon))
    h = (math.sin((lat2 - lat1) / 2) ** 2
         + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2)
    return 2 * EARTH_RADIUS_MILES * math.asin(min(1.0, math.sqrt(h)))


def interpolate_along(a: GeoPoint, b: GeoPoint, f: float) -> GeoPoint:
    """Linear interpolation in lat/lon space; f=0 gives a, f=1 gives b."""
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"interpolation fraction must be in [0, 1], got {f}")
    if f == 0.0:
        return a
    if f == 1.0:
        return b
    return GeoPoint(a.lat + (b.lat - a.lat) * f, a.lon + (b.lon - a.lon) * f)


def _clip_to_box(x0, y0, x1, y1, w, h):
    # Liang-Barsky against [0, w] x [0, h]
    dx, dy = x1 - x0, y1 - y0
    t0, t1 = 0.0, 1.0
    for p, q in ((-dx, x0), (dx, w - x0), (-dy, y0), (dy, h - y0)):
        if p == 0:
            if q < 0:
                return None
            continue
        t = q / p
        if p < 0:
            if t > t1:
                return None
            t0 = max(t0, t)
        else:
            if t < t0:
                return None
            t1 = min(t1, t)
    return (x0 + t0 * dx, y0 + t0 * dy, x0 + t1 * dx, y0 + t1 * dy)


def supercover_cells(a: GeoPoint, b: GeoPoint, g: GeoGrid) -> list[CellIndex]:
    """Every cell the segment a-b passes through, in traversal order.

    Endpoints outside the grid are clipped to the grid boundary first; a
    segment entirely outside yields an empty list. Passing exactly through
    a cell corner steps diagonally without touching the two side cells.
    """
    if (b.lat, b.lon) < (a.lat, a.lon):
        # walk in a canonical direction so a-b and b-a cover identical cells
        return supercover_cells(b, a, g)[::-1]
    x0, y0 = _fractional(a.lat, a.lon, g)
    x1, y1 = _fractional(b.lat, b.lon, g)
    clipped = _clip_to_box(x0, y0, x1, y1, g.ncols, g.nrows)
    if clipped is None:
        return []
    x0, y0, x1, y1 = clipped

    r, c = _cell_of(x0, y0, g)
    end = _cell_of(x1, y1, g)
    cells = [CellIndex(r, c)]
    dx, dy = x1 - x0, y1 - y0

    if dx > 0:
        step_c, t_max_x, t_dx = 1, (c + 1 - x0) / dx, 1 / dx
    elif dx < 0:
        step_c, t_max_x, t_dx = -1, (x0 - c) / -dx, -1 / dx
    else:
        step_c, t_max_x, t_dx = 0, math.inf, math.inf
    if dy > 0:
        step_r, t_max_y, t_dy = 1, (r + 1 - y0) / dy, 1 / dy
    elif dy < 0:
        step_r, t_max_y, t_dy = -1, (y0 - r) / -dy, -1 / dy
    else:
        step_r, t_max_y, t_dy = 0, math.inf, math.inf

    budget = abs(end.row - r) + abs(end.col - c)
    while (r, c) != end and budget >= 0:
        if c == end.col:
            move_x, move_y = False, True
        elif r == end.row:
            move_x, move_y = True, False
        else:
            move_x = t_max_x <= t_max_y
            move_y = t_max_y <= t_max_x
        if move_x:
            c += step_c
            t_max_x += t_dx
        if move_y:
            r += step_r
            t_max_y += t_dy
        budget -= 1
        cells.append(CellIndex(r, c))
    return cells
