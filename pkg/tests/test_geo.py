import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gridfire.errors import OutOfBounds
from gridfire.geo import (
    CellIndex,
    GeoGrid,
    GeoPoint,
    haversine_miles,
    interpolate_along,
    project,
    project_many,
    supercover_cells,
)

STUDY_AREA = GeoGrid(464, 517, 120.0, 37.6, 38.1, -120.7, -120.0)


def unit_grid(n=20, m=20):
    # cell edges fall on round numbers: lat 0..n, lon 0..m
    return GeoGrid(n, m, 100.0, 0.0, float(n), 0.0, float(m))


def test_grid_cell_count():
    assert STUDY_AREA.n_cells == 239_888


@pytest.mark.parametrize("kwargs", [
    dict(nrows=0, ncols=1, cellsize_m=1, lat_min=0, lat_max=1, lon_min=0, lon_max=1),
    dict(nrows=1, ncols=1, cellsize_m=0, lat_min=0, lat_max=1, lon_min=0, lon_max=1),
    dict(nrows=1, ncols=1, cellsize_m=1, lat_min=1, lat_max=1, lon_min=0, lon_max=1),
    dict(nrows=1, ncols=1, cellsize_m=1, lat_min=0, lat_max=1, lon_min=2, lon_max=1),
])
def test_grid_rejects_invalid(kwargs):
    with pytest.raises(ValueError):
        GeoGrid(**kwargs)


def test_project_corner():
    assert project(GeoPoint(STUDY_AREA.lat_max, STUDY_AREA.lon_min), STUDY_AREA) == (0, 0)


def test_project_far_corner_clamps():
    assert project(GeoPoint(STUDY_AREA.lat_min, STUDY_AREA.lon_max), STUDY_AREA) == (463, 516)


def test_project_center_of_2x2():
    g = GeoGrid(2, 2, 10.0, 0.0, 2.0, 10.0, 12.0)
    # col = floor((11 - 10) / 2 * 2) = 1; row = floor((2 - 1) / 2 * 2) = 1
    assert project(GeoPoint(1.0, 11.0), g) == CellIndex(1, 1)


def test_project_out_of_bounds_study_area():
    with pytest.raises(OutOfBounds):
        project(GeoPoint(37.0, -120.5), STUDY_AREA)


def test_project_cell_center_identity():
    g = GeoGrid(7, 11, 30.0, 12.3, 12.9, -3.2, -2.1)
    for r in range(g.nrows):
        for c in range(g.ncols):
            assert project(g.cell_center(r, c), g) == (r, c)


def test_project_many_matches_scalar():
    rng = np.random.default_rng(3)
    lats = rng.uniform(37.5, 38.2, 2000)
    lons = rng.uniform(-120.8, -119.9, 2000)
    rows, cols, inside = project_many(lats, lons, STUDY_AREA)
    for lat, lon, r, c, ok in zip(lats, lons, rows, cols, inside):
        p = GeoPoint(float(lat), float(lon))
        if ok:
            assert project(p, STUDY_AREA) == (r, c)
        else:
            with pytest.raises(OutOfBounds):
                project(p, STUDY_AREA)


def _chord_miles(a, b):
    # independent great-circle oracle via 3-D unit vectors
    def vec(p):
        la, lo = math.radians(p.lat), math.radians(p.lon)
        return (math.cos(la) * math.cos(lo), math.cos(la) * math.sin(lo), math.sin(la))
    u, v = vec(a), vec(b)
    chord = math.dist(u, v)
    return 2 * 3958.7613 * math.asin(chord / 2)


def test_haversine_identity():
    p = GeoPoint(37.8, -120.3)
    assert haversine_miles(p, p) == 0.0


def test_haversine_one_degree_latitude():
    d = haversine_miles(GeoPoint(37.0, -120.0), GeoPoint(38.0, -120.0))
    assert d == pytest.approx(math.pi / 180 * 3958.7613, rel=1e-12)
    assert d == pytest.approx(69.09, abs=0.005)


def test_haversine_against_chord_oracle():
    a, b = GeoPoint(37.6, -120.7), GeoPoint(38.1, -120.0)
    assert haversine_miles(a, b) == pytest.approx(_chord_miles(a, b), rel=1e-9)


points = st.builds(GeoPoint, st.floats(-89, 89), st.floats(-179, 179))


@given(points, points, points)
def test_haversine_metric_properties(a, b, c):
    ab, ba = haversine_miles(a, b), haversine_miles(b, a)
    assert ab == pytest.approx(ba, abs=1e-9)
    assert ab >= 0
    assert haversine_miles(a, c) <= ab + haversine_miles(b, c) + 1e-6


def test_interpolate_endpoints_and_fractions():
    a, b = GeoPoint(37.6, -120.0), GeoPoint(38.0, -120.4)
    assert interpolate_along(a, b, 0.0) == a
    assert interpolate_along(a, b, 1.0) == b
    mid = interpolate_along(a, b, 0.5)
    assert mid.lat == pytest.approx(37.8) and mid.lon == pytest.approx(-120.2)
    q = interpolate_along(a, b, 0.25)
    assert q.lat == pytest.approx(37.7) and q.lon == pytest.approx(-120.1)


@pytest.mark.parametrize("f", [-0.01, 1.01, math.nan])
def test_interpolate_rejects_bad_fraction(f):
    with pytest.raises(ValueError):
        interpolate_along(GeoPoint(0, 0), GeoPoint(1, 1), f)


# --- supercover -----------------------------------------------------------

def _xy_to_point(x, y, g):
    # inverse of the fractional mapping: x = col units east, y = row units south
    return GeoPoint(g.lat_max - y / g.nrows * (g.lat_max - g.lat_min),
                    g.lon_min + x / g.ncols * (g.lon_max - g.lon_min))


def dense_sampling_oracle(a, b, g, steps_per_cell=1000):
    x0 = (a.lon - g.lon_min) / (g.lon_max - g.lon_min) * g.ncols
    x1 = (b.lon - g.lon_min) / (g.lon_max - g.lon_min) * g.ncols
    y0 = (g.lat_max - a.lat) / (g.lat_max - g.lat_min) * g.nrows
    y1 = (g.lat_max - b.lat) / (g.lat_max - g.lat_min) * g.nrows
    n = max(1, int(math.ceil(math.hypot(x1 - x0, y1 - y0) * steps_per_cell)))
    cells = set()
    for i in range(n + 1):
        t = i / n
        p = GeoPoint(a.lat + (b.lat - a.lat) * t, a.lon + (b.lon - a.lon) * t)
        if g.contains(p):
            cells.add(tuple(project(p, g)))
    return cells


def chord_in_cell(x0, y0, x1, y1, r, c):
    """Length (cell units) of the part of the segment inside cell (r, c)."""
    t0, t1 = 0.0, 1.0
    dx, dy = x1 - x0, y1 - y0
    for p, q in ((-dx, x0 - c), (dx, c + 1 - x0), (-dy, y0 - r), (dy, r + 1 - y0)):
        if p == 0:
            if q < 0:
                return 0.0
            continue
        t = q / p
        if p < 0:
            t0 = max(t0, t)
        else:
            t1 = min(t1, t)
    return max(0.0, t1 - t0) * math.hypot(dx, dy)


def test_supercover_degenerate_segment():
    g = unit_grid()
    p = GeoPoint(5.5, 7.5)
    assert supercover_cells(p, p, g) == [project(p, g)]


def test_supercover_horizontal_three_columns():
    g = unit_grid()
    a, b = _xy_to_point(3.2, 4.5, g), _xy_to_point(5.7, 4.5, g)
    assert supercover_cells(a, b, g) == [(4, 3), (4, 4), (4, 5)]


def test_supercover_entirely_outside_is_empty():
    g = unit_grid()
    assert supercover_cells(GeoPoint(30, 30), GeoPoint(40, 35), g) == []


def test_supercover_clips_to_grid():
    g = unit_grid(4, 4)
    a, b = _xy_to_point(-2.0, 1.5, g), _xy_to_point(6.0, 1.5, g)
    assert supercover_cells(a, b, g) == [(1, 0), (1, 1), (1, 2), (1, 3)]


def _random_segments(seed, count, g):
    rng = random.Random(seed)
    for _ in range(count):
        yield (_xy_to_point(rng.uniform(0, g.ncols), rng.uniform(0, g.nrows), g),
               _xy_to_point(rng.uniform(0, g.ncols), rng.uniform(0, g.nrows), g))


def test_supercover_matches_dense_sampling_oracle():
    g = unit_grid()
    for a, b in _random_segments(11, 200, g):
        got = supercover_cells(a, b, g)
        oracle = dense_sampling_oracle(a, b, g)
        extra = set(map(tuple, got)) - oracle
        # cells the sampler skipped must be clipped by less than one sample step
        x0, y0 = (a.lon - g.lon_min) * g.ncols / (g.lon_max - g.lon_min), (g.lat_max - a.lat) * g.nrows / (g.lat_max - g.lat_min)
        x1, y1 = (b.lon - g.lon_min) * g.ncols / (g.lon_max - g.lon_min), (g.lat_max - b.lat) * g.nrows / (g.lat_max - g.lat_min)
        for r, c in extra:
            assert chord_in_cell(x0, y0, x1, y1, r, c) < 2e-3
        assert oracle <= set(map(tuple, got))


def test_supercover_matches_exact_chord_oracle():
    g = unit_grid()
    for a, b in _random_segments(12, 300, g):
        x0, y0 = a.lon, g.lat_max - a.lat
        x1, y1 = b.lon, g.lat_max - b.lat
        oracle = {(r, c) for r in range(g.nrows) for c in range(g.ncols)
                  if chord_in_cell(x0, y0, x1, y1, r, c) > 1e-12}
        got = supercover_cells(a, b, g)
        assert set(map(tuple, got)) == oracle
        assert len(got) == len(set(got))


def test_supercover_diagonal_through_corners():
    g = unit_grid(5, 5)
    a, b = _xy_to_point(0.5, 0.5, g), _xy_to_point(4.5, 4.5, g)
    assert supercover_cells(a, b, g) == [(i, i) for i in range(5)]


coords = st.floats(0.0, 20.0, allow_nan=False)


@settings(max_examples=200)
@given(coords, coords, coords, coords)
def test_supercover_properties(x0, y0, x1, y1):
    g = unit_grid()
    a, b = _xy_to_point(x0, y0, g), _xy_to_point(x1, y1, g)
    fwd = supercover_cells(a, b, g)
    back = supercover_cells(b, a, g)
    assert fwd[0] == project(a, g) and fwd[-1] == project(b, g)
    for (r1, c1), (r2, c2) in zip(fwd, fwd[1:]):
        assert abs(r1 - r2) <= 1 and abs(c1 - c2) <= 1
    assert len(fwd) == len(set(fwd))
    assert back == fwd[::-1]
