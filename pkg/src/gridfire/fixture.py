"""Synthetic study area for demos and end-to-end tests.

Sized like a regional screening study: an IEEE 30-bus network
(41 branches) laid over a 464 x 517 grid of 120 m cells spanning
lat 37.6-38.1, lon -120.7 to -120.0, with hourly weather from
2022-07-01T00:00Z. Terrain, fuels, structures and bus coordinates are
generated from a fixed seed; they are not real data.
"""

from __future__ import annotations

import csv
import json
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter

from .geo import GeoGrid, GeoPoint
from .ingest import (
    Branch,
    Bus,
    LandscapeStack,
    StructurePoints,
    Topology,
    WeatherRecord,
    write_landscape,
    write_topology,
)

STUDY_GRID = GeoGrid(464, 517, 120.0, 37.6, 38.1, -120.7, -120.0)
WEATHER_START = datetime(2022, 7, 1, tzinfo=timezone.utc)
DEFAULT_SEED = 2022

# Standard IEEE 30-bus branch list (from, to), numbered 1..41 in order.
IEEE30_BRANCHES = (
    (1, 2), (1, 3), (2, 4), (3, 4), (2, 5), (2, 6), (4, 6), (5, 7), (6, 7), (6, 8),
    (6, 9), (6, 10), (9, 11), (9, 10), (4, 12), (12, 13), (12, 14), (12, 15), (12, 16), (14, 15),
    (16, 17), (15, 18), (18, 19), (19, 20), (10, 20), (10, 17), (10, 21), (10, 22), (21, 22), (15, 23),
    (22, 24), (23, 24), (24, 25), (25, 26), (25, 27), (28, 27), (27, 29), (27, 30), (29, 30), (8, 28),
    (6, 28),
)

# Synthetic bus placement inside the study box (lat, lon).
IEEE30_BUSES = (
    (38.0900, -120.6900), (38.0900, -120.4900), (37.9460, -120.6740), (37.9567, -120.5300),
    (38.0900, -120.2500), (37.9833, -120.4100), (38.0260, -120.3300), (37.9833, -120.2100),
    (37.9033, -120.4100), (37.8233, -120.3700), (37.8927, -120.5140), (37.8500, -120.5700),
    (37.8393, -120.6900), (37.7327, -120.6740), (37.7433, -120.5300), (37.8233, -120.4900),
    (37.7860, -120.4100), (37.6687, -120.5060), (37.7167, -120.4100), (37.7433, -120.3460),
    (37.7860, -120.2420), (37.8607, -120.2500), (37.6100, -120.4900), (37.7060, -120.2900),
    (37.6793, -120.1700), (37.6100, -120.2420), (37.7700, -120.0900), (37.9300, -120.1460),
    (37.8660, -120.0100), (37.6687, -120.0180),
)

# (lat, lon, spread in degrees, structure count)
_TOWNS = (
    (37.745, -120.035, 0.012, 520),   # between buses 27, 29 and 30
    (37.985, -120.395, 0.015, 450),
    (37.845, -120.560, 0.010, 300),
    (37.705, -120.300, 0.010, 260),
    (38.060, -120.300, 0.008, 180),
)
_RURAL_STRUCTURES = 400


def ieee30_topology() -> Topology:
    buses = tuple(Bus(i, GeoPoint(lat, lon)) for i, (lat, lon) in enumerate(IEEE30_BUSES, start=1))
    branches = tuple(Branch(i, a, b) for i, (a, b) in enumerate(IEEE30_BRANCHES, start=1))
    return Topology(buses, branches)


def _smooth_noise(rng, shape, sigma):
    field = gaussian_filter(rng.normal(size=shape), sigma=sigma, mode="reflect")
    return field / field.std()


def synthetic_landscape(grid: GeoGrid = STUDY_GRID, seed: int = DEFAULT_SEED) -> LandscapeStack:
    rng = np.random.default_rng(seed)
    nrows, ncols = grid.shape
    rows, cols = np.mgrid[0:nrows, 0:ncols].astype(np.float64)
    east = cols / max(ncols - 1, 1)

    # foothills rising eastward, with scattered ridges and hollows
    elevation = 250.0 + 1500.0 * east ** 1.4
    for _ in range(40):
        r0, c0 = rng.uniform(0, nrows), rng.uniform(0, ncols)
        sigma = rng.uniform(0.02, 0.08) * max(nrows, ncols)
        amp = rng.uniform(-180.0, 260.0)
        elevation += amp * np.exp(-((rows - r0) ** 2 + (cols - c0) ** 2) / (2 * sigma ** 2))
    elevation += 25.0 * _smooth_noise(rng, grid.shape, 3)
    elevation = np.round(elevation, 1)

    cs = grid.cellsize_m
    dz_dnorth, dz_deast = np.gradient(elevation, cs)
    dz_dnorth = -dz_dnorth  # row index grows southward
    slope = np.degrees(np.arctan(np.hypot(dz_deast, dz_dnorth)))
    aspect = np.degrees(np.arctan2(-dz_deast, -dz_dnorth)) % 360.0
    aspect[aspect >= 360.0] = 0.0
    slope, aspect = np.round(slope, 2), np.round(aspect, 2) % 360.0

    band = (elevation - elevation.min()) / np.ptp(elevation)
    texture = _smooth_noise(rng, grid.shape, 10)
    fuel = np.where(texture < 0.0, 1, 2)
    fuel = np.where(texture > 0.9, 3, fuel)
    shrub = np.where(texture > 0.3, 4, np.where(texture < -0.4, 5, 6))
    timber = np.where(texture > 0.4, 10, np.where(texture < -0.4, 8, 9))
    fuel = np.where(band > 0.35, shrub, fuel)
    fuel = np.where(band > 0.65, timber, fuel)
    fuel = np.where(band > 0.97, 99, fuel)

    # a reservoir in the western lowlands
    lake = ((rows - 0.62 * nrows) / (0.05 * nrows)) ** 2 + ((cols - 0.22 * ncols) / (0.09 * ncols)) ** 2 < 1
    fuel = np.where(lake, 98, fuel)
    # irrigated farmland patch
    farm = (rows > 0.88 * nrows) & (cols < 0.12 * ncols)
    fuel = np.where(farm, 93, fuel)
    # town cores
    for lat, lon, spread, _ in _TOWNS:
        rc = (grid.lat_max - lat) / (grid.lat_max - grid.lat_min) * nrows
        cc = (lon - grid.lon_min) / (grid.lon_max - grid.lon_min) * ncols
        core = np.hypot(rows - rc, cols - cc) < 2.5
        fuel = np.where(core, 91, fuel)
    fuel = fuel.astype(np.int32)

    grass = np.isin(fuel, (1, 2, 3))
    shrubs = np.isin(fuel, (4, 5, 6))
    trees = np.isin(fuel, (8, 9, 10))
    jitter = rng.uniform(0.0, 1.0, grid.shape)
    canopy_cover = np.round(np.select([grass, shrubs, trees], [5 * jitter, 20 + 30 * jitter, 50 + 35 * jitter], 0.0))
    stand_height = np.round(np.select([shrubs, trees], [2 + 2 * jitter, 15 + 20 * jitter], 0.0), 1)
    canopy_base_height = np.round(np.where(trees, 2 + 4 * jitter, 0.0), 1)
    canopy_bulk_density = np.round(np.where(trees, 0.05 + 0.2 * jitter, 0.0), 3)

    return LandscapeStack(
        grid=grid,
        elevation=elevation,
        slope=slope,
        aspect=aspect,
        fuel_model=fuel,
        canopy_cover=canopy_cover,
        stand_height=stand_height,
        canopy_base_height=canopy_base_height,
        canopy_bulk_density=canopy_bulk_density,
    )


def synthetic_structures(grid: GeoGrid = STUDY_GRID, seed: int = DEFAULT_SEED) -> StructurePoints:
    rng = np.random.default_rng(seed + 1)
    lats, lons = [], []
    for lat, lon, spread, count in _TOWNS:
        lats.append(rng.normal(lat, spread, count))
        lons.append(rng.normal(lon, spread * 1.25, count))
    lats.append(rng.uniform(grid.lat_min, grid.lat_max, _RURAL_STRUCTURES))
    lons.append(rng.uniform(grid.lon_min, grid.lon_max, _RURAL_STRUCTURES))
    lat = np.round(np.clip(np.concatenate(lats), grid.lat_min, grid.lat_max), 6)
    lon = np.round(np.clip(np.concatenate(lons), grid.lon_min, grid.lon_max), 6)
    return StructurePoints(tuple(GeoPoint(float(a), float(b)) for a, b in zip(lat, lon)))


def synthetic_weather(start: datetime = WEATHER_START, hours: int = 24,
                      seed: int = DEFAULT_SEED) -> list[WeatherRecord]:
    rng = np.random.default_rng(seed + 2)
    records = []
    for h in range(hours):
        diurnal = np.sin((h - 9) / 24 * 2 * np.pi)
        records.append(WeatherRecord(
            timestamp=start + timedelta(hours=h),
            temperature=round(float(26 + 9 * diurnal + rng.normal(0, 0.5)), 1),
            relative_humidity=round(float(np.clip(30 - 14 * diurnal + rng.normal(0, 2), 5, 95)), 1),
            pressure=round(float(1011 - 2 * diurnal + rng.normal(0, 0.3)), 1),
            wind_direction=round(float((245 + rng.normal(0, 15)) % 360), 1),
            wind_speed=round(float(max(0.0, 4.5 + 1.5 * diurnal + rng.normal(0, 0.6))), 1),
        ))
    return records


def write_weather_csv(records: list[WeatherRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp", "temperature_c", "rh_pct", "pressure_hpa", "wind_dir_deg", "wind_speed_mps"])
        for r in records:
            w.writerow([r.timestamp.strftime("%Y-%m-%dT%H:%M:%SZ"), r.temperature, r.relative_humidity,
                        r.pressure, r.wind_direction, r.wind_speed])


def write_structures_csv(points: StructurePoints, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lat", "lon"])
        for p in points.points:
            w.writerow([repr(p.lat), repr(p.lon)])


def fixture_config(duration_min: float = 180.0) -> dict:
    return {
        "landscape": "landscape/landscape.json",
        "weather": "weather.csv",
        "topology": "topology.json",
        "structures": "structures.csv",
        "output_dir": "out",
        "spacing_miles": 5.0,
        "burn_window": {"start": "2022-07-01T18:00:00Z", "duration_min": duration_min},
        "policy": "max",
    }


def write_fixture(directory, grid: GeoGrid = STUDY_GRID, seed: int = DEFAULT_SEED) -> Path:
    """Write the full synthetic input set plus ``config.json``; returns the config path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_landscape(synthetic_landscape(grid, seed), directory / "landscape")
    write_weather_csv(synthetic_weather(seed=seed), directory / "weather.csv")
    write_topology(ieee30_topology(), directory / "topology.json")
    write_structures_csv(synthetic_structures(grid, seed), directory / "structures.csv")
    config_path = directory / "config.json"
    config_path.write_text(json.dumps(fixture_config(), indent=2) + "\n", encoding="utf-8")
    return config_path
