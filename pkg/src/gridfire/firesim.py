"""Burned-area production: a minimum-travel-time spread engine and an
importer for externally simulated burn rasters.

The engine treats the landscape as a directed graph over cells (8 or 16
neighbors) and computes earliest fire arrival by shortest paths. Edge
travel time from cell i to neighbor j is::

    dist_ij / (R0[fuel_i] * exp(a * s_ij) * (1 + c * U * max(0, cos(bearing_ij - toward))**b))

with ``s_ij`` the rise/run from i to j and ``toward`` the direction the
wind blows to. Rate of spread is evaluated at the source cell.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from datetime import datetime

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import EmptyWindow, IgnitionOutOfGrid, NonBinaryValue
from .esri import read_esri_ascii, write_esri_ascii
from .geo import CellIndex, GeoGrid
from .ingest import NONBURNABLE_FUELS, LandscapeStack, WeatherRecord, check_header, grid_header

logger = logging.getLogger(__name__)

# Base rate of spread (m/min) for the 13 Anderson fuel models. Tuning
# constants for the surrogate engine, not measured values.
DEFAULT_ROS_TABLE = {
    1: 18.0,   # short grass
    2: 9.0,    # timber grass and understory
    3: 24.0,   # tall grass
    4: 15.0,   # chaparral
    5: 4.5,    # brush
    6: 6.0,    # dormant brush
    7: 4.5,    # southern rough
    8: 0.4,    # closed timber litter
    9: 1.8,    # hardwood litter
    10: 2.4,   # timber litter and understory
    11: 1.5,   # light slash
    12: 3.0,   # medium slash
    13: 3.6,   # heavy slash
}

_OFFSETS_8 = ((-1, 0), (1, 0), (0, -1), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1))
_OFFSETS_16 = _OFFSETS_8 + ((-1, -2), (-1, 2), (1, -2), (1, 2), (-2, -1), (-2, 1), (2, -1), (2, 1))


@dataclass(frozen=True)
class SpreadParams:
    duration_min: float
    ros_table: dict = field(default_factory=lambda: dict(DEFAULT_ROS_TABLE))
    slope_coeff: float = 3.0
    wind_coeff: float = 0.5
    wind_exponent: float = 2.0
    connectivity: int = 16

    def __post_init__(self):
        if not self.duration_min > 0:
            raise ValueError(f"duration_min must be positive, got {self.duration_min}")
        if self.connectivity not in (8, 16):
            raise ValueError(f"connectivity must be 8 or 16, got {self.connectivity}")
        for code, r0 in self.ros_table.items():
            if not (r0 >= 0 and math.isfinite(r0)):
                raise ValueError(f"rate of spread for fuel {code} must be finite and >= 0, got {r0}")
            if int(code) in NONBURNABLE_FUELS and r0 != 0:
                raise ValueError(f"fuel {code} is nonburnable; its rate of spread must be 0")

    def base_ros(self, fuel_model: np.ndarray) -> np.ndarray:
        """Per-cell R0; codes missing from the table do not burn."""
        lut_size = max(int(fuel_model.max(initial=0)), max(map(int, self.ros_table), default=0)) + 1
        lut = np.zeros(lut_size, dtype=np.float64)
        for code, r0 in self.ros_table.items():
            if int(code) not in NONBURNABLE_FUELS:
                lut[int(code)] = r0
        unknown = ~np.isin(fuel_model, [int(c) for c in self.ros_table]) & ~np.isin(
            fuel_model, list(NONBURNABLE_FUELS))
        if unknown.any():
            codes = sorted(set(np.unique(fuel_model[unknown]).tolist()))
            logger.warning("fuel codes %s have no rate of spread and are treated as nonburnable "
                           "(%d cells)", codes, int(unknown.sum()))
        return lut[fuel_model]


@dataclass(frozen=True)
class BurnMatrix:
    grid: GeoGrid
    status: np.ndarray  # uint8, 1 = burned

    @property
    def burned_cells(self) -> int:
        return int(self.status.sum())

    @classmethod
    def empty(cls, grid: GeoGrid) -> "BurnMatrix":
        return cls(grid, np.zeros(grid.shape, dtype=np.uint8))


@dataclass(frozen=True)
class ArrivalTimeGrid:
    grid: GeoGrid
    arrival_min: np.ndarray  # +inf where fire never arrives within the horizon


def mean_wind(weather: list[WeatherRecord], window: tuple[datetime, datetime]) -> tuple[float, float]:
    """Vector-mean wind over records with ``t0 <= timestamp <= t1``.

    Returns ``(speed_mps, from_direction_deg)``; a vanishing mean vector
    is reported as calm ``(0.0, 0.0)``.
    """
    t0, t1 = window
    recs = [w for w in weather if t0 <= w.timestamp <= t1]
    if not recs:
        raise EmptyWindow(f"no weather records between {t0.isoformat()} and {t1.isoformat()}")
    # components of the vector the wind blows toward (east, north)
    u = sum(-w.wind_speed * math.sin(math.radians(w.wind_direction)) for w in recs) / len(recs)
    v = sum(-w.wind_speed * math.cos(math.radians(w.wind_direction)) for w in recs) / len(recs)
    speed = math.hypot(u, v)
    scale = max(w.wind_speed for w in recs)
    if speed <= 1e-9 * scale or speed == 0.0:
        return 0.0, 0.0
    direction = math.degrees(math.atan2(-u, -v)) % 360.0
    if direction >= 360.0:
        direction = 0.0
    return speed, direction


class SpreadGraph:
    """Directed cell graph with travel-time weights for one landscape and wind.

    Built once per sweep and shared read-only by every scenario.
    """

    def __init__(self, landscape: LandscapeStack, wind: tuple[float, float], params: SpreadParams):
        self.grid = landscape.grid
        self.params = params
        self.wind = (float(wind[0]), float(wind[1]))
        self.r0 = params.base_ros(landscape.fuel_model)
        self.matrix = self._build(landscape.elevation.astype(np.float64))

    def _build(self, elev: np.ndarray) -> csr_matrix:
        nrows, ncols = self.grid.shape
        p = self.params
        speed, from_dir = self.wind
        toward = math.radians(from_dir + 180.0)
        burnable = self.r0 > 0
        idx = np.arange(nrows * ncols, dtype=np.int64).reshape(nrows, ncols)
        offsets = _OFFSETS_16 if p.connectivity == 16 else _OFFSETS_8

        srcs, dsts, weights = [], [], []
        for dr, dc in offsets:
            rs = slice(max(0, -dr), nrows - max(0, dr))
            cs = slice(max(0, -dc), ncols - max(0, dc))
            rd = slice(rs.start + dr, rs.stop + dr)
            cd = slice(cs.start + dc, cs.stop + dc)
            if rs.start >= rs.stop or cs.start >= cs.stop:
                continue
            ok = burnable[rs, cs] & self._route_open(burnable, dr, dc, rs, cs)
            if not ok.any():
                continue
            dist = self.grid.cellsize_m * math.sqrt(dr * dr + dc * dc)
            bearing = math.atan2(dc, -dr)
            alignment = max(0.0, math.cos(bearing - toward))
            wind_factor = 1.0 + p.wind_coeff * speed * alignment ** p.wind_exponent
            rise = (elev[rd, cd] - elev[rs, cs]) / dist
            ros = self.r0[rs, cs] * np.exp(p.slope_coeff * rise) * wind_factor
            srcs.append(idx[rs, cs][ok])
            dsts.append(idx[rd, cd][ok])
            weights.append(dist / ros[ok])

        n = nrows * ncols
        if not srcs:
            return csr_matrix((n, n), dtype=np.float64)
        return csr_matrix((np.concatenate(weights), (np.concatenate(srcs), np.concatenate(dsts))),
                          shape=(n, n))

    @staticmethod
    def _route_open(burnable, dr, dc, rs, cs) -> np.ndarray | bool:
        """Block moves that would slip past nonburnable cells.

        A diagonal step needs one burnable flank; a knight step needs both
        cells its straight path crosses to be burnable.
        """
        def shifted(a, b):
            return burnable[rs.start + a:rs.stop + a, cs.start + b:cs.stop + b]

        adr, adc = abs(dr), abs(dc)
        if adr + adc == 1:
            return True
        if adr == 1 and adc == 1:
            return shifted(dr, 0) | shifted(0, dc)
        sr, sc = (dr > 0) - (dr < 0), (dc > 0) - (dc < 0)
        if adc == 2:
            return shifted(0, sc) & shifted(dr, sc)
        return shifted(sr, 0) & shifted(sr, dc)

    def run(self, ignition: CellIndex, duration_min: float | None = None,
            horizon_min: float | None = None) -> tuple[BurnMatrix, ArrivalTimeGrid]:
        """Arrival times from one ignition cell, thresholded at ``duration_min``.

        Arrival times are only resolved up to ``horizon_min`` (default: the
        duration); cells beyond it report +inf.
        """
        duration = self.params.duration_min if duration_min is None else duration_min
        if not duration > 0:
            raise ValueError(f"duration must be positive, got {duration}")
        horizon = duration if horizon_min is None else horizon_min
        nrows, ncols = self.grid.shape
        r, c = ignition
        if not (0 <= r < nrows and 0 <= c < ncols):
            raise IgnitionOutOfGrid(f"ignition cell ({r}, {c}) outside {nrows}x{ncols} grid")
        source = r * ncols + c

        if self.r0[r, c] <= 0:
            logger.warning("ignition cell (%d, %d) is nonburnable; nothing burns", r, c)
            arrival = np.full(self.grid.shape, np.inf)
            arrival[r, c] = 0.0
            return BurnMatrix.empty(self.grid), ArrivalTimeGrid(self.grid, arrival)

        limit = np.inf if math.isinf(horizon) else horizon * (1 + 1e-9) + 1e-9
        arrival = dijkstra(self.matrix, directed=True, indices=source, limit=limit)
        arrival = arrival.reshape(self.grid.shape)
        if not math.isinf(horizon):
            arrival[arrival > horizon] = np.inf
        status = (arrival <= duration).astype(np.uint8)
        return BurnMatrix(self.grid, status), ArrivalTimeGrid(self.grid, arrival)


def simulate_mtt(landscape: LandscapeStack, wind: tuple[float, float], params: SpreadParams,
                 ignition: CellIndex) -> tuple[BurnMatrix, ArrivalTimeGrid]:
    """One-shot spread simulation; builds the cell graph and runs it once."""
    nrows, ncols = landscape.grid.shape
    if not (0 <= ignition[0] < nrows and 0 <= ignition[1] < ncols):
        raise IgnitionOutOfGrid(f"ignition cell {tuple(ignition)} outside {nrows}x{ncols} grid")
    return SpreadGraph(landscape, wind, params).run(ignition)


def write_burn_raster(burn: BurnMatrix, path) -> None:
    write_esri_ascii(path, grid_header(burn.grid), burn.status.astype(np.int64))


def import_burn_raster(path, grid: GeoGrid) -> BurnMatrix:
    """Read a 0/1 burned-area raster co-registered with ``grid``; NODATA reads as 0."""
    header, data = read_esri_ascii(path)
    check_header(header, grid, path)
    data = np.where(data == header.nodata_value, 0.0, data)
    bad = (data != 0) & (data != 1)
    if bad.any():
        r, c = map(int, np.argwhere(bad)[0])
        raise NonBinaryValue(f"burn value {data[r, c]!r} is not 0 or 1", path=path, row=r, col=c)
    return BurnMatrix(grid, data.astype(np.uint8))
