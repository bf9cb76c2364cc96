import math
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from gridfire.errors import EmptyWindow, HeaderMismatch, IgnitionOutOfGrid, NonBinaryValue
from gridfire.esri import EsriHeader, write_esri_ascii
from gridfire.firesim import (
    BurnMatrix,
    SpreadGraph,
    SpreadParams,
    import_burn_raster,
    mean_wind,
    simulate_mtt,
    write_burn_raster,
)
from gridfire.geo import CellIndex
from gridfire.ingest import WeatherRecord

from conftest import make_stack
from oracles import bellman_ford, spread_edges

T0 = datetime(2022, 7, 1, tzinfo=timezone.utc)


def rec(hour, speed, direction):
    return WeatherRecord(T0 + timedelta(hours=hour), 30.0, 20.0, 1010.0, direction, speed)


# --- mean wind --------------------------------------------------------------

def test_mean_wind_singleton():
    speed, d = mean_wind([rec(0, 5.0, 270.0)], (T0, T0 + timedelta(hours=1)))
    assert speed == pytest.approx(5.0, abs=1e-12)
    assert d == pytest.approx(270.0, abs=1e-9)


def test_mean_wind_cancellation_is_calm():
    assert mean_wind([rec(0, 5, 0), rec(1, 5, 180)], (T0, T0 + timedelta(hours=2))) == (0.0, 0.0)


def test_mean_wind_component_average():
    speed, d = mean_wind([rec(0, 3, 90), rec(1, 4, 90)], (T0, T0 + timedelta(hours=2)))
    assert speed == pytest.approx(3.5, abs=1e-12)
    assert d == pytest.approx(90.0, abs=1e-9)


def test_mean_wind_window_filters_and_empty():
    recs = [rec(0, 3, 90), rec(5, 10, 0)]
    speed, d = mean_wind(recs, (T0, T0 + timedelta(hours=1)))
    assert speed == pytest.approx(3.0)
    with pytest.raises(EmptyWindow):
        mean_wind(recs, (T0 + timedelta(hours=1), T0 + timedelta(hours=2)))


# --- params -----------------------------------------------------------------

def test_params_validation():
    with pytest.raises(ValueError):
        SpreadParams(duration_min=0)
    with pytest.raises(ValueError):
        SpreadParams(duration_min=10, connectivity=4)
    with pytest.raises(ValueError):
        SpreadParams(duration_min=10, ros_table={1: -1.0})
    with pytest.raises(ValueError):
        SpreadParams(duration_min=10, ros_table={91: 3.0})


# --- engine -----------------------------------------------------------------

def uniform_params(duration, connectivity=16, **kw):
    return SpreadParams(duration_min=duration, ros_table={1: 10.0}, connectivity=connectivity, **kw)


def test_zero_duration_burns_only_ignition():
    stack = make_stack(9, 9)
    burn, arrival = simulate_mtt(stack, (0.0, 0.0), uniform_params(1e-9), CellIndex(4, 4))
    assert burn.burned_cells == 1 and burn.status[4, 4] == 1
    assert arrival.arrival_min[4, 4] == 0.0


def test_ignition_out_of_grid():
    with pytest.raises(IgnitionOutOfGrid):
        simulate_mtt(make_stack(5, 5), (0.0, 0.0), uniform_params(10), CellIndex(5, 0))


def test_nonburnable_ignition_warns(caplog):
    fuel = np.ones((5, 5), dtype=np.int32)
    fuel[2, 2] = 98
    with caplog.at_level("WARNING"):
        burn, _ = simulate_mtt(make_stack(5, 5, fuel=fuel), (0, 0), uniform_params(1e6), CellIndex(2, 2))
    assert burn.burned_cells == 0
    assert "nonburnable" in caplog.text


@pytest.mark.parametrize("connectivity, lo, hi", [(16, 0.95, 1.00), (8, 0.86, 0.93)])
def test_isotropy_against_polygon_ball(connectivity, lo, hi):
    radius = 30
    cellsize = 30.0
    stack = make_stack(81, 81, cellsize=cellsize)
    duration = radius * cellsize / 10.0
    burn, _ = simulate_mtt(stack, (0.0, 0.0), uniform_params(duration, connectivity), CellIndex(40, 40))
    ratio = burn.burned_cells / (math.pi * radius ** 2)
    assert lo <= ratio <= hi
    if connectivity == 16:
        assert ratio == pytest.approx(8 * math.sin(math.pi / 8) / math.pi, abs=0.02)


def test_calm_flat_uniform_fourfold_symmetry():
    stack = make_stack(41, 41)
    burn, _ = simulate_mtt(stack, (0.0, 0.0), uniform_params(45.0), CellIndex(20, 20))
    s = burn.status
    assert np.array_equal(s, np.rot90(s)) and np.array_equal(s, s.T)


@pytest.mark.parametrize("connectivity", [8, 16])
@pytest.mark.parametrize("terrain", [False, True])
def test_arrival_matches_bruteforce_shortest_paths(connectivity, terrain):
    rng = np.random.default_rng(77 + terrain)
    table = {1: 3.0, 2: 7.5, 3: 12.25, 4: 20.0, 5: 1.5}
    for _ in range(25):
        fuel = rng.choice([1, 2, 3, 4, 5, 98], size=(5, 5), p=[.19, .19, .19, .19, .14, .10]).astype(np.int32)
        fuel[2, 2] = 3
        elev = np.round(rng.normal(300, 8, (5, 5)), 1) if terrain else np.zeros((5, 5))
        wind = (float(rng.uniform(0, 10)), float(rng.uniform(0, 360))) if terrain else (0.0, 0.0)
        stack = make_stack(5, 5, fuel=fuel, elevation=elev, cellsize=30.0)
        params = SpreadParams(duration_min=1e9, ros_table=table, connectivity=connectivity)
        src = (int(rng.integers(5)), int(rng.integers(5)))
        if fuel[src] == 98:
            src = (2, 2)
        graph = SpreadGraph(stack, wind, params)
        _, arrival = graph.run(CellIndex(*src), horizon_min=math.inf)
        r0 = [[table.get(int(f), 0.0) for f in row] for row in fuel]
        edges = spread_edges(r0, 30.0, connectivity, elev.tolist() if terrain else None, wind)
        expected = bellman_ford(25, edges, src[0] * 5 + src[1])
        assert arrival.arrival_min.ravel().tolist() == expected


def test_relaxation_property_holds_on_every_edge():
    stack = make_stack(20, 20, seed=5, fuel=np.random.default_rng(5).choice([1, 4, 8, 99], (20, 20)),
                       elevation=np.random.default_rng(6).normal(500, 40, (20, 20)))
    graph = SpreadGraph(stack, (6.0, 225.0), SpreadParams(duration_min=100.0))
    fuel = stack.fuel_model
    src = next((r, c) for r in range(20) for c in range(20) if fuel[r, c] != 99)
    _, arrival = graph.run(CellIndex(*src), horizon_min=math.inf)
    a = arrival.arrival_min.ravel()
    assert a[src[0] * 20 + src[1]] == 0.0
    coo = graph.matrix.tocoo()
    finite = np.isfinite(a[coo.row])
    assert np.all(a[coo.col][finite] <= a[coo.row][finite] + coo.data[finite] + 1e-9)


def test_nonburnable_ring_contains_fire():
    fuel = np.ones((21, 21), dtype=np.int32)
    # 8-connected diamond ring of water around the centre
    for k in range(-6, 7):
        rr = 6 - abs(k)
        fuel[10 + k, 10 + rr] = 98
        fuel[10 + k, 10 - rr] = 98
    stack = make_stack(21, 21, fuel=fuel)
    burn, _ = simulate_mtt(stack, (15.0, 270.0), uniform_params(1e6), CellIndex(10, 10))
    rows, cols = np.nonzero(burn.status)
    assert burn.burned_cells > 1
    assert np.all(np.abs(rows - 10) + np.abs(cols - 10) <= 6)


def test_eight_connectivity_respects_diagonal_ring():
    fuel = np.ones((9, 9), dtype=np.int32)
    for k in range(-3, 4):
        rr = 3 - abs(k)
        fuel[4 + k, 4 + rr] = 98
        fuel[4 + k, 4 - rr] = 98
    stack = make_stack(9, 9, fuel=fuel)
    burn, _ = simulate_mtt(stack, (0, 0), uniform_params(1e6, connectivity=8), CellIndex(4, 4))
    rows, cols = np.nonzero(burn.status)
    assert np.all(np.abs(rows - 4) + np.abs(cols - 4) <= 3)


def test_burned_set_monotone_in_duration():
    rng = np.random.default_rng(8)
    stack = make_stack(30, 30, fuel=rng.choice([1, 2, 4, 8, 98], (30, 30)),
                       elevation=rng.normal(400, 30, (30, 30)))
    graph = SpreadGraph(stack, (4.0, 200.0), SpreadParams(duration_min=30.0))
    src = CellIndex(15, 15)
    prev = None
    for t in (5.0, 10.0, 20.0, 40.0, 80.0):
        burn, _ = graph.run(src, duration_min=t)
        if prev is not None:
            assert np.all(burn.status >= prev)
        prev = burn.status


def test_upslope_runs_faster():
    elev = np.tile(np.arange(31, dtype=float)[::-1, None] * 10.0, (1, 31))  # rises northward
    stack = make_stack(31, 31, elevation=elev)
    burn, _ = simulate_mtt(stack, (0.0, 0.0), uniform_params(30.0), CellIndex(15, 15))
    rows = np.nonzero(burn.status)[0]
    assert 15 - rows.min() > rows.max() - 15


def test_wind_pushes_fire_downwind():
    stack = make_stack(61, 61)
    burn, _ = simulate_mtt(stack, (10.0, 270.0), uniform_params(40.0), CellIndex(30, 30))
    cols = np.nonzero(burn.status)[1]
    assert cols.max() - 30 > 30 - cols.min()
    assert cols.mean() > 30


# --- raster import/export --------------------------------------------------

def test_burn_raster_round_trip(tmp_path):
    stack = make_stack(12, 14)
    burn, _ = simulate_mtt(stack, (3.0, 45.0), uniform_params(25.0), CellIndex(6, 7))
    write_burn_raster(burn, tmp_path / "b.asc")
    back = import_burn_raster(tmp_path / "b.asc", stack.grid)
    assert np.array_equal(back.status, burn.status) and back.grid == burn.grid


def test_import_all_zero_and_nodata(tmp_path):
    stack = make_stack(4, 4)
    write_burn_raster(BurnMatrix.empty(stack.grid), tmp_path / "z.asc")
    assert import_burn_raster(tmp_path / "z.asc", stack.grid).burned_cells == 0
    data = np.zeros((4, 4))
    data[1, 1] = -9999
    data[2, 2] = 1
    write_esri_ascii(tmp_path / "n.asc", EsriHeader(4, 4, -120.7, 37.6, 30.0), data)
    b = import_burn_raster(tmp_path / "n.asc", stack.grid)
    assert b.burned_cells == 1 and b.status[1, 1] == 0


def test_import_rejects_non_binary(tmp_path):
    stack = make_stack(4, 4)
    data = np.zeros((4, 4))
    data[3, 1] = 2
    write_esri_ascii(tmp_path / "b.asc", EsriHeader(4, 4, -120.7, 37.6, 30.0), data)
    with pytest.raises(NonBinaryValue) as err:
        import_burn_raster(tmp_path / "b.asc", stack.grid)
    assert (err.value.row, err.value.col) == (3, 1)


def test_import_rejects_mismatched_header(tmp_path):
    stack = make_stack(4, 4)
    write_esri_ascii(tmp_path / "b.asc", EsriHeader(4, 4, -120.7, 37.6, 120.0), np.zeros((4, 4)))
    with pytest.raises(HeaderMismatch):
        import_burn_raster(tmp_path / "b.asc", stack.grid)
