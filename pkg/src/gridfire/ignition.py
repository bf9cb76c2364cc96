"""Evenly spaced ignition points along transmission branches."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ZeroLengthBranch
from .geo import GeoGrid, GeoPoint, haversine_miles, interpolate_along
from .ingest import Topology


@dataclass(frozen=True)
class IgnitionPoint:
    scenario_id: int
    branch_id: int
    location: GeoPoint
    offset_miles: float


def round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def points_per_branch(length_miles: float, spacing_miles: float) -> int:
    return max(1, round_half_away(length_miles / spacing_miles))


def generate_ignition_points(topology: Topology, spacing_miles: float) -> list[IgnitionPoint]:
    """Place ``n = max(1, round(L / spacing))`` points on each branch of length L.

    Points sit at the midpoints of n equal intervals, offsets
    ``L * (i - 0.5) / n``, so none coincides with a bus. Scenario ids run
    1..N in (branch_id, offset) order.
    """
    if not spacing_miles > 0:
        raise ValueError(f"spacing_miles must be positive, got {spacing_miles}")
    staged = []
    for branch in sorted(topology.branches, key=lambda b: b.branch_id):
        a, b = topology.endpoints(branch)
        length = haversine_miles(a, b)
        if length == 0.0:
            raise ZeroLengthBranch(f"branch {branch.branch_id} has identical bus coordinates")
        n = points_per_branch(length, spacing_miles)
        for i in range(1, n + 1):
            frac = (i - 0.5) / n
            staged.append((branch.branch_id, length * frac, interpolate_along(a, b, frac)))
    return [IgnitionPoint(sid, bid, loc, off)
            for sid, (bid, off, loc) in enumerate(staged, start=1)]


def outside_grid(points: list[IgnitionPoint], grid: GeoGrid) -> list[IgnitionPoint]:
    return [p for p in points if not grid.contains(p.location)]


def write_ignition_csv(points: list[IgnitionPoint], path) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scenario_id", "branch_id", "lat", "lon", "offset_miles"])
        for p in points:
            w.writerow([p.scenario_id, p.branch_id, repr(p.location.lat), repr(p.location.lon),
                        repr(p.offset_miles)])
