import numpy as np
import pytest

from gridfire.geo import GeoGrid
from gridfire.ingest import LandscapeStack


def make_stack(nrows=10, ncols=10, *, fuel=1, elevation=None, cellsize=30.0, seed=None):
    grid = GeoGrid(nrows, ncols, cellsize, 37.6, 37.6 + 0.01 * nrows, -120.7, -120.7 + 0.01 * ncols)
    shape = (nrows, ncols)
    rng = np.random.default_rng(seed)
    if elevation is None:
        elevation = np.zeros(shape)
    fuel_arr = np.full(shape, fuel, dtype=np.int32) if np.isscalar(fuel) else np.asarray(fuel, np.int32)
    if seed is None:
        layers = dict(
            slope=np.zeros(shape), aspect=np.zeros(shape), canopy_cover=np.zeros(shape),
            stand_height=np.zeros(shape), canopy_base_height=np.zeros(shape),
            canopy_bulk_density=np.zeros(shape),
        )
    else:
        layers = dict(
            slope=rng.uniform(0, 90, shape), aspect=rng.uniform(0, 359.9, shape),
            canopy_cover=rng.uniform(0, 100, shape), stand_height=rng.uniform(0, 40, shape),
            canopy_base_height=rng.uniform(0, 10, shape),
            canopy_bulk_density=rng.uniform(0, 0.4, shape),
        )
    return LandscapeStack(grid=grid, elevation=np.asarray(elevation, dtype=float),
                          fuel_model=fuel_arr, **layers)


@pytest.fixture
def stack_factory():
    return make_stack


# --- acceptance summary: one PASS/FAIL line per criterion --------------------

_CRITERIA: dict[str, str] = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if "test_acceptance.py" not in report.nodeid or not name.startswith("test_criterion_"):
        return
    if report.failed:
        _CRITERIA[name] = "FAIL"
    elif report.skipped:
        _CRITERIA.setdefault(name, "SKIP")
    elif report.when == "call":
        _CRITERIA.setdefault(name, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA):
        _, _, num, *words = name.split("_")
        terminalreporter.write_line(f"criterion {int(num):>2}  {_CRITERIA[name]}  {' '.join(words)}")
