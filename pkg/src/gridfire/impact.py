"""Overlay of a burned-area matrix on environment, lines and structures."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, ZeroLengthBranch
from .firesim import BurnMatrix
from .geo import GeoGrid, haversine_miles, interpolate_along, project_many, supercover_cells
from .ingest import StructurePoints, Topology

logger = logging.getLogger(__name__)

SQ_METERS_PER_ACRE = 4046.8564224
# remainders shorter than this are treated as floating-point noise
_SEGMENT_EPS_MILES = 1e-9


def acres_per_cell(cellsize_m: float) -> float:
    return cellsize_m * cellsize_m / SQ_METERS_PER_ACRE


@dataclass(frozen=True)
class StructureDensityGrid:
    grid: GeoGrid
    count: np.ndarray  # int64 per cell
    out_of_bounds: int = 0

    @property
    def total(self) -> int:
        return int(self.count.sum())


@dataclass(frozen=True)
class LineSegment:
    start_miles: float
    end_miles: float
    cells: np.ndarray  # flat cell indices of the supercover, traversal order

    @property
    def length_miles(self) -> float:
        return self.end_miles - self.start_miles


@dataclass(frozen=True)
class LineSegmentation:
    grid: GeoGrid
    segments: dict  # branch_id -> list[LineSegment]

    def branch_ids(self) -> list[int]:
        return sorted(self.segments)


@dataclass(frozen=True)
class ScenarioImpact:
    scenario_id: int
    burned_acres: float
    affected_miles_by_branch: dict
    destroyed_structures: int

    @property
    def affected_miles(self) -> float:
        return float(sum(self.affected_miles_by_branch.values()))


def _same_grid(a: GeoGrid, b: GeoGrid, what: str) -> None:
    if a != b:
        raise GridMismatch(f"{what}: burn grid {a.shape} does not match {b.shape} grid or georeference")


def burned_acres(burn: BurnMatrix) -> float:
    return burn.burned_cells * acres_per_cell(burn.grid.cellsize_m)


def rasterize_structures(points: StructurePoints, grid: GeoGrid) -> StructureDensityGrid:
    """Count structures per cell; points outside the grid are counted and logged."""
    count = np.zeros(grid.n_cells, dtype=np.int64)
    if len(points) == 0:
        return StructureDensityGrid(grid, count.reshape(grid.shape), 0)
    lats, lons = points.arrays()
    rows, cols, inside = project_many(lats, lons, grid)
    np.add.at(count, rows[inside] * grid.ncols + cols[inside], 1)
    outside = int((~inside).sum())
    if outside:
        logger.warning("%d structures fall outside the study grid and are ignored", outside)
    return StructureDensityGrid(grid, count.reshape(grid.shape), outside)


def destroyed_structures(burn: BurnMatrix, density: StructureDensityGrid) -> int:
    _same_grid(burn.grid, density.grid, "structure density")
    return int((density.count * burn.status).sum())


def segment_lines(topology: Topology, grid: GeoGrid) -> LineSegmentation:
    """Split every branch into 1-mile pieces along its straight path.

    The last piece carries the remainder when the length is not a whole
    number of miles. Each piece stores the supercover of its sub-segment.
    """
    segments = {}
    for branch in sorted(topology.branches, key=lambda b: b.branch_id):
        a, b = topology.endpoints(branch)
        length = haversine_miles(a, b)
        if length == 0.0:
            raise ZeroLengthBranch(f"branch {branch.branch_id} has identical bus coordinates")
        n = max(1, math.ceil(length - _SEGMENT_EPS_MILES))
        pieces = []
        for k in range(n):
            start, end = float(k), (float(k + 1) if k + 1 < n else length)
            p = interpolate_along(a, b, start / length)
            q = interpolate_along(a, b, end / length)
            cells = supercover_cells(p, q, grid)
            flat = np.array([r * grid.ncols + c for r, c in cells], dtype=np.int64)
            pieces.append(LineSegment(start, end, flat))
        if not any(len(s.cells) for s in pieces):
            logger.warning("branch %d lies entirely outside the study grid", branch.branch_id)
        segments[branch.branch_id] = pieces
    return LineSegmentation(grid, segments)


def affected_line_miles(burn: BurnMatrix, seg: LineSegmentation) -> dict:
    """Miles to rebuild per branch: one full mile per segment touching a burned cell."""
    _same_grid(burn.grid, seg.grid, "line segmentation")
    flat = burn.status.ravel()
    out = {}
    for branch_id in seg.branch_ids():
        hit = sum(1 for s in seg.segments[branch_id] if len(s.cells) and flat[s.cells].any())
        out[branch_id] = float(hit)
    return out


def assess(burn: BurnMatrix, seg: LineSegmentation, density: StructureDensityGrid,
           scenario_id: int) -> ScenarioImpact:
    _same_grid(burn.grid, seg.grid, "line segmentation")
    _same_grid(burn.grid, density.grid, "structure density")
    return ScenarioImpact(
        scenario_id=scenario_id,
        burned_acres=burned_acres(burn),
        affected_miles_by_branch=affected_line_miles(burn, seg),
        destroyed_structures=destroyed_structures(burn, density),
    )
