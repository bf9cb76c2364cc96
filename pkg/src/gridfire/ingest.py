"""Loaders for the five offline input datasets.

Landscape: JSON manifest naming eight ESRI ASCII layers plus the study
bounding box. Weather, topology and structures: CSV / JSON / CSV.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import (
    CoordinateOutOfRange,
    DanglingBusReference,
    DuplicateId,
    HeaderMismatch,
    InvalidBranch,
    MissingLayer,
    NonMonotonicTimestamps,
    ParseError,
    RangeViolation,
)
from .esri import EsriHeader, read_esri_ascii, write_esri_ascii
from .geo import GeoGrid, GeoPoint

logger = logging.getLogger(__name__)

LAYERS = (
    "elevation",
    "slope",
    "aspect",
    "fuel_model",
    "canopy_cover",
    "stand_height",
    "canopy_base_height",
    "canopy_bulk_density",
)
NONBURNABLE_FUELS = frozenset({0, 91, 92, 93, 98, 99})
FUEL_NODATA_CODE = 99

# (inclusive min, max, max is exclusive) per layer; None = unbounded
_RANGES = {
    "elevation": (None, None, False),
    "slope": (0.0, 90.0, False),
    "aspect": (0.0, 360.0, True),
    "fuel_model": (0.0, None, False),
    "canopy_cover": (0.0, 100.0, False),
    "stand_height": (0.0, None, False),
    "canopy_base_height": (0.0, None, False),
    "canopy_bulk_density": (0.0, None, False),
}

WEATHER_COLUMNS = ["timestamp", "temperature_c", "rh_pct", "pressure_hpa",
                   "wind_dir_deg", "wind_speed_mps"]


@dataclass(frozen=True)
class LandscapeStack:
    grid: GeoGrid
    elevation: np.ndarray
    slope: np.ndarray
    aspect: np.ndarray
    fuel_model: np.ndarray
    canopy_cover: np.ndarray
    stand_height: np.ndarray
    canopy_base_height: np.ndarray
    canopy_bulk_density: np.ndarray

    def layer(self, name: str) -> np.ndarray:
        return getattr(self, name)

    def esri_header(self, nodata_value: float = -9999.0) -> EsriHeader:
        return grid_header(self.grid, nodata_value)


@dataclass(frozen=True)
class WeatherRecord:
    timestamp: datetime
    temperature: float
    relative_humidity: float
    pressure: float
    wind_direction: float
    wind_speed: float


@dataclass(frozen=True)
class Bus:
    bus_id: int
    location: GeoPoint


@dataclass(frozen=True)
class Branch:
    branch_id: int
    from_bus: int
    to_bus: int


@dataclass(frozen=True)
class Topology:
    buses: tuple[Bus, ...]
    branches: tuple[Branch, ...]

    @cached_property
    def bus_locations(self) -> dict[int, GeoPoint]:
        return {b.bus_id: b.location for b in self.buses}

    def endpoints(self, branch: Branch) -> tuple[GeoPoint, GeoPoint]:
        return self.bus_locations[branch.from_bus], self.bus_locations[branch.to_bus]


@dataclass(frozen=True)
class StructurePoints:
    points: tuple[GeoPoint, ...]

    def __len__(self):
        return len(self.points)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        lats = np.array([p.lat for p in self.points], dtype=np.float64)
        lons = np.array([p.lon for p in self.points], dtype=np.float64)
        return lats, lons


def grid_header(grid: GeoGrid, nodata_value: float = -9999.0) -> EsriHeader:
    """ESRI header for a grid: lower-left corner in degrees, cellsize in meters."""
    return EsriHeader(grid.ncols, grid.nrows, grid.lon_min, grid.lat_min,
                      grid.cellsize_m, nodata_value)


def check_header(header: EsriHeader, grid: GeoGrid, path) -> None:
    expected = grid_header(grid)
    if header.georef() != expected.georef():
        names = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize")
        diffs = [f"{n}={got} (expected {want})"
                 for n, got, want in zip(names, header.georef(), expected.georef()) if got != want]
        raise HeaderMismatch("header disagrees with landscape grid: " + ", ".join(diffs), path=path)


# --- landscape --------------------------------------------------------------

def load_landscape(manifest_path) -> LandscapeStack:
    """Load and validate the eight-layer landscape named by a JSON manifest.

    The manifest looks like::

        {"bounds": {"lat_min": .., "lat_max": .., "lon_min": .., "lon_max": ..},
         "layers": {"elevation": "elevation.asc", ...}}

    Layer paths are resolved relative to the manifest. Every layer header
    must carry ``xllcorner = lon_min``, ``yllcorner = lat_min`` and the
    cell size in meters.
    """
    manifest_path = Path(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path=manifest_path, line=exc.lineno) from None
    if not isinstance(manifest, dict):
        raise ParseError("manifest must be a JSON object", path=manifest_path)

    layers = manifest.get("layers")
    if not isinstance(layers, dict):
        raise ParseError("manifest lacks a 'layers' object", path=manifest_path)
    for name in LAYERS:
        if name not in layers:
            raise MissingLayer(f"manifest does not name layer '{name}'", path=manifest_path)

    try:
        b = manifest["bounds"]
        bounds = {k: float(b[k]) for k in ("lat_min", "lat_max", "lon_min", "lon_max")}
    except (KeyError, TypeError, ValueError):
        raise ParseError("manifest 'bounds' needs numeric lat_min, lat_max, lon_min, lon_max",
                         path=manifest_path) from None

    base = manifest_path.parent
    arrays = {}
    grid = None
    first_path = None
    for name in LAYERS:
        layer_path = base / layers[name]
        try:
            header, data = read_esri_ascii(layer_path)
        except FileNotFoundError:
            raise MissingLayer(f"layer '{name}' file not found", path=layer_path) from None
        if grid is None:
            if header.xllcorner != bounds["lon_min"] or header.yllcorner != bounds["lat_min"]:
                raise HeaderMismatch(
                    f"lower-left corner ({header.xllcorner}, {header.yllcorner}) does not match "
                    f"manifest bounds (lon_min={bounds['lon_min']}, lat_min={bounds['lat_min']})",
                    path=layer_path)
            try:
                grid = GeoGrid(header.nrows, header.ncols, header.cellsize, **bounds)
            except ValueError as exc:
                raise ParseError(str(exc), path=manifest_path) from None
            first_path = layer_path
        else:
            try:
                check_header(header, grid, layer_path)
            except HeaderMismatch as exc:
                raise HeaderMismatch(f"{exc.message} (reference layer {first_path})",
                                     path=layer_path) from None
        arrays[name] = _clean_layer(name, header, data, layer_path)
    return LandscapeStack(grid=grid, **arrays)


def _clean_layer(name, header, data, path) -> np.ndarray:
    nodata = data == header.nodata_value
    n_nodata = int(nodata.sum())
    if name == "fuel_model":
        fill = FUEL_NODATA_CODE
    else:
        fill = 0.0
    if n_nodata:
        logger.warning("%s: %d NODATA cells in %s replaced with %s", path, n_nodata, name, fill)
        data = np.where(nodata, fill, data)

    lo, hi, hi_open = _RANGES[name]
    bad = np.zeros(data.shape, dtype=bool)
    if lo is not None:
        bad |= data < lo
    if hi is not None:
        bad |= (data >= hi) if hi_open else (data > hi)
    if name == "fuel_model":
        bad |= data != np.floor(data)
    if bad.any():
        r, c = map(int, np.argwhere(bad)[0])
        raise RangeViolation(f"{name} value {data[r, c]!r} out of range", path=path, row=r, col=c)

    if name == "fuel_model":
        return data.astype(np.int32)
    return data


def write_landscape(stack: LandscapeStack, directory, manifest_name: str = "landscape.json") -> Path:
    """Write every layer as ``<name>.asc`` plus a manifest; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    header = stack.esri_header()
    for name in LAYERS:
        write_esri_ascii(directory / f"{name}.asc", header, stack.layer(name))
    g = stack.grid
    manifest = {
        "bounds": {"lat_min": g.lat_min, "lat_max": g.lat_max,
                   "lon_min": g.lon_min, "lon_max": g.lon_max},
        "layers": {name: f"{name}.asc" for name in LAYERS},
    }
    path = directory / manifest_name
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return path


# --- weather ----------------------------------------------------------------

def parse_timestamp(text: str) -> datetime:
    """ISO-8601 timestamp; a trailing ``Z`` or missing offset means UTC."""
    text = text.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def load_weather(csv_path) -> list[WeatherRecord]:
    csv_path = Path(csv_path)
    records: list[WeatherRecord] = []
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != WEATHER_COLUMNS:
            raise ParseError(f"expected header {','.join(WEATHER_COLUMNS)}", path=csv_path, line=1)
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(WEATHER_COLUMNS):
                raise ParseError(f"expected {len(WEATHER_COLUMNS)} fields, got {len(row)}",
                                 path=csv_path, line=line)
            try:
                ts = parse_timestamp(row[0])
                temp, rh, pres, wdir, wspd = (_finite(v) for v in row[1:])
            except ValueError as exc:
                raise ParseError(str(exc), path=csv_path, line=line) from None
            if not 0.0 <= rh <= 100.0:
                raise RangeViolation(f"rh_pct {rh} outside [0, 100]", path=csv_path, line=line)
            if wspd < 0.0:
                raise RangeViolation(f"wind_speed_mps {wspd} is negative", path=csv_path, line=line)
            if wdir == 360.0:
                wdir = 0.0
            if not 0.0 <= wdir < 360.0:
                raise RangeViolation(f"wind_dir_deg {wdir} outside [0, 360)", path=csv_path, line=line)
            if records and ts <= records[-1].timestamp:
                raise NonMonotonicTimestamps(
                    f"timestamp {row[0].strip()} not after {records[-1].timestamp.isoformat()}",
                    path=csv_path, line=line)
            records.append(WeatherRecord(ts, temp, rh, pres, wdir, wspd))
    return records


def _finite(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise ValueError(f"non-finite value {text!r}")
    return v


# --- topology ---------------------------------------------------------------

def load_topology(json_path) -> Topology:
    json_path = Path(json_path)
    try:
        doc = json.loads(json_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path=json_path, line=exc.lineno) from None
    try:
        raw_buses = doc["buses"]
        raw_branches = doc["branches"]
        buses = [Bus(_int_id(b["id"]), GeoPoint(float(b["lat"]), float(b["lon"]))) for b in raw_buses]
        branches = [Branch(_int_id(br["id"]), _int_id(br["from"]), _int_id(br["to"]))
                    for br in raw_branches]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed topology: {exc!r}", path=json_path) from None

    seen = set()
    for bus in buses:
        if bus.bus_id in seen:
            raise DuplicateId(f"duplicate bus id {bus.bus_id}", path=json_path)
        seen.add(bus.bus_id)
        p = bus.location
        if not (math.isfinite(p.lat) and math.isfinite(p.lon)
                and -90 <= p.lat <= 90 and -180 <= p.lon <= 180):
            raise CoordinateOutOfRange(f"bus {bus.bus_id} at {tuple(p)}", path=json_path)
    seen_br = set()
    for br in branches:
        if br.branch_id in seen_br:
            raise DuplicateId(f"duplicate branch id {br.branch_id}", path=json_path)
        seen_br.add(br.branch_id)
        for end in (br.from_bus, br.to_bus):
            if end not in seen:
                raise DanglingBusReference(f"branch {br.branch_id} references missing bus {end}",
                                           path=json_path)
        if br.from_bus == br.to_bus:
            raise InvalidBranch(f"branch {br.branch_id} connects bus {br.from_bus} to itself",
                                path=json_path)
    return Topology(tuple(buses), tuple(branches))


def _int_id(v) -> int:
    if isinstance(v, bool) or (isinstance(v, float) and not v.is_integer()):
        raise ValueError(f"id must be an integer, got {v!r}")
    return int(v)


def write_topology(topology: Topology, json_path) -> None:
    doc = {
        "buses": [{"id": b.bus_id, "lat": b.location.lat, "lon": b.location.lon}
                  for b in topology.buses],
        "branches": [{"id": br.branch_id, "from": br.from_bus, "to": br.to_bus}
                     for br in topology.branches],
    }
    Path(json_path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


# --- structures -------------------------------------------------------------

def load_structures(csv_path) -> StructurePoints:
    csv_path = Path(csv_path)
    points = []
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["lat", "lon"]:
            raise ParseError("expected header lat,lon", path=csv_path, line=1)
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 2:
                raise ParseError(f"expected 2 fields, got {len(row)}", path=csv_path, line=line)
            try:
                lat, lon = _finite(row[0]), _finite(row[1])
            except ValueError as exc:
                raise ParseError(str(exc), path=csv_path, line=line) from None
            if not -90.0 <= lat <= 90.0 or not -180.0 <= lon <= 180.0:
                raise CoordinateOutOfRange(f"({lat}, {lon}) is not a valid coordinate",
                                           path=csv_path, line=line)
            points.append(GeoPoint(lat, lon))
    return StructurePoints(tuple(points))
