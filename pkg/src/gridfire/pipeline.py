"""End-to-end sweep: inputs -> ignitions -> burns -> impacts -> costs -> heatmap."""

from __future__ import annotations

import csv
import json
import logging
import multiprocessing
import shutil
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .config import RunConfig
from .errors import GridfireError, ParseError, UnknownScenario
from .firesim import BurnMatrix, SpreadGraph, import_burn_raster, mean_wind, write_burn_raster
from .geo import GeoPoint, project
from .ignition import IgnitionPoint, generate_ignition_points, outside_grid
from .impact import (
    LineSegmentation,
    ScenarioImpact,
    StructureDensityGrid,
    assess,
    rasterize_structures,
    segment_lines,
)
from .ingest import (
    LandscapeStack,
    StructurePoints,
    Topology,
    WeatherRecord,
    load_landscape,
    load_structures,
    load_topology,
    load_weather,
)
from .risk import (
    LineRisk,
    ScenarioCost,
    aggregate_line_risk,
    classify,
    format_cents,
    heatmap_geojson,
    scenario_cost,
)

logger = logging.getLogger(__name__)

SCENARIO_COLUMNS = [
    "scenario_id", "branch_id", "lat", "lon", "burned_acres", "affected_miles",
    "destroyed_structures", "env_cost", "line_cost", "structure_cost", "total_cost",
]
LINE_RISK_COLUMNS = ["branch_id", "risk_usd", "risk_class"]


class ScenarioFailed(Exception):
    exit_code = 3

    def __init__(self, scenario_id: int, cause: BaseException):
        self.scenario_id = scenario_id
        self.cause = cause
        if isinstance(cause, GridfireError):
            self.exit_code = cause.exit_code
        super().__init__(f"scenario {scenario_id} failed: {cause}")


@dataclass(frozen=True)
class Inputs:
    landscape: LandscapeStack
    weather: list[WeatherRecord]
    topology: Topology
    structures: StructurePoints


def load_inputs(cfg: RunConfig) -> Inputs:
    """Load every input, raising the first loader error encountered."""
    for p in (cfg.weather, cfg.topology, cfg.structures):
        if not p.is_file():
            raise ParseError("input file not found", path=p)
    if not cfg.landscape.is_file():
        raise ParseError("landscape manifest not found", path=cfg.landscape)
    return Inputs(
        landscape=load_landscape(cfg.landscape),
        weather=load_weather(cfg.weather),
        topology=load_topology(cfg.topology),
        structures=load_structures(cfg.structures),
    )


def validation_report(cfg: RunConfig, inputs: Inputs) -> str:
    g = inputs.landscape.grid
    w = inputs.weather
    span = (f"{w[0].timestamp.isoformat()} to {w[-1].timestamp.isoformat()} ({len(w)} records)"
            if w else "no records")
    mean_wind(w, cfg.burn_window)  # the burn window must be covered
    return "\n".join([
        f"grid: {g.nrows} x {g.ncols} = {g.n_cells} cells of {g.cellsize_m:g} m",
        f"bounds: lat {g.lat_min:g} to {g.lat_max:g}, lon {g.lon_min:g} to {g.lon_max:g}",
        f"topology: {len(inputs.topology.buses)} buses, {len(inputs.topology.branches)} branches",
        f"structures: {len(inputs.structures)}",
        f"weather: {span}",
    ])


# --- per-scenario work -------------------------------------------------------

@dataclass(frozen=True)
class _Shared:
    graph: SpreadGraph | None
    segmentation: LineSegmentation
    density: StructureDensityGrid
    import_dir: Path | None
    raster_dir: Path | None


_STATE: _Shared | None = None


def _init_worker(shared: _Shared) -> None:
    global _STATE
    _STATE = shared


def _burn_for(shared: _Shared, point: IgnitionPoint) -> BurnMatrix:
    grid = shared.segmentation.grid
    if shared.import_dir is not None:
        return import_burn_raster(shared.import_dir / f"burn_{point.scenario_id}.asc", grid)
    if not grid.contains(point.location):
        logger.warning("scenario %d ignites outside the study grid; no burn", point.scenario_id)
        return BurnMatrix.empty(grid)
    burn, _ = shared.graph.run(project(point.location, grid))
    return burn


def _run_scenario(point: IgnitionPoint, shared: _Shared | None = None) -> ScenarioImpact:
    shared = shared or _STATE
    try:
        burn = _burn_for(shared, point)
        if shared.raster_dir is not None:
            write_burn_raster(burn, shared.raster_dir / f"burn_{point.scenario_id}.asc")
        return assess(burn, shared.segmentation, shared.density, point.scenario_id)
    except Exception as exc:
        raise ScenarioFailed(point.scenario_id, exc) from exc


def _prepare(cfg: RunConfig, inputs: Inputs, raster_dir: Path | None) -> _Shared:
    grid = inputs.landscape.grid
    graph = None
    if cfg.import_burn_dir is None:
        wind = mean_wind(inputs.weather, cfg.burn_window)
        graph = SpreadGraph(inputs.landscape, wind, cfg.spread)
    return _Shared(
        graph=graph,
        segmentation=segment_lines(inputs.topology, grid),
        density=rasterize_structures(inputs.structures, grid),
        import_dir=cfg.import_burn_dir,
        raster_dir=raster_dir,
    )


def run_scenarios(points: list[IgnitionPoint], shared: _Shared, workers: int) -> list[ScenarioImpact]:
    """Simulate and assess every ignition; results come back in input order."""
    if workers <= 1 or len(points) <= 1:
        return [_run_scenario(p, shared) for p in points]
    methods = multiprocessing.get_all_start_methods()
    ctx = multiprocessing.get_context("fork" if "fork" in methods else None)
    with ProcessPoolExecutor(max_workers=min(workers, len(points)), mp_context=ctx,
                             initializer=_init_worker, initargs=(shared,)) as pool:
        # map preserves submission order regardless of completion order
        return list(pool.map(_run_scenario, points, chunksize=1))


# --- output ------------------------------------------------------------------

def scenario_rows(points: list[IgnitionPoint], impacts: list[ScenarioImpact],
                  costs: list[ScenarioCost]) -> list[list[str]]:
    rows = []
    for p, imp, c in zip(points, impacts, costs):
        rows.append([
            str(p.scenario_id), str(p.branch_id), repr(p.location.lat), repr(p.location.lon),
            repr(float(imp.burned_acres)), repr(float(imp.affected_miles)), str(int(imp.destroyed_structures)),
            format_cents(c.env_cost), format_cents(c.line_cost), format_cents(c.structure_cost),
            format_cents(c.total),
        ])
    return rows


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def risk_outputs(topology: Topology, costs: list[ScenarioCost], points: list[IgnitionPoint],
                 policy: str, directory: Path) -> list[LineRisk]:
    ids = [b.branch_id for b in topology.branches]
    line_risks = classify(aggregate_line_risk(costs, points, policy, branch_ids=ids))
    _write_csv(directory / "line_risk.csv", LINE_RISK_COLUMNS,
               [[str(lr.branch_id), format_cents(lr.risk), lr.risk_class] for lr in line_risks])
    (directory / "heatmap.geojson").write_text(heatmap_geojson(topology, line_risks),
                                               encoding="utf-8", newline="\n")
    return line_risks


def write_effective_config(cfg: RunConfig, directory: Path) -> None:
    (directory / "effective_config.json").write_text(json.dumps(cfg.to_dict(), indent=2) + "\n",
                                                     encoding="utf-8", newline="\n")


class _Staging:
    """Collect outputs in a scratch directory; publish them only on success."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir

    def __enter__(self) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.path = Path(tempfile.mkdtemp(prefix=".partial-", dir=self.out_dir))
        return self.path

    def __exit__(self, exc_type, exc, tb):
        try:
            if exc_type is None:
                for f in sorted(self.path.iterdir()):
                    f.replace(self.out_dir / f.name)
        finally:
            shutil.rmtree(self.path, ignore_errors=True)
        return False


@dataclass(frozen=True)
class SweepResult:
    points: list[IgnitionPoint]
    impacts: list[ScenarioImpact]
    costs: list[ScenarioCost]
    line_risks: list[LineRisk]


def ignitions_for(cfg: RunConfig, inputs: Inputs) -> list[IgnitionPoint]:
    points = generate_ignition_points(inputs.topology, cfg.spacing_miles)
    for p in outside_grid(points, inputs.landscape.grid):
        logger.warning("ignition %d on branch %d lies outside the study grid", p.scenario_id, p.branch_id)
    return points


def sweep(cfg: RunConfig, inputs: Inputs | None = None) -> SweepResult:
    inputs = inputs or load_inputs(cfg)
    points = ignitions_for(cfg, inputs)
    with _Staging(cfg.output_dir) as stage:
        shared = _prepare(cfg, inputs, stage if cfg.write_burn_rasters else None)
        impacts = run_scenarios(points, shared, cfg.workers)
        costs = [scenario_cost(imp, cfg.costs) for imp in impacts]
        _write_csv(stage / "scenarios.csv", SCENARIO_COLUMNS, scenario_rows(points, impacts, costs))
        line_risks = risk_outputs(inputs.topology, costs, points, cfg.policy, stage)
        write_effective_config(cfg, stage)
    return SweepResult(points, impacts, costs, line_risks)


def simulate_one(cfg: RunConfig, scenario_id: int, inputs: Inputs | None = None) -> tuple[list[str], Path]:
    """Run one scenario, write its burn raster, and return its results row."""
    inputs = inputs or load_inputs(cfg)
    points = {p.scenario_id: p for p in ignitions_for(cfg, inputs)}
    if scenario_id not in points:
        raise UnknownScenario(f"scenario {scenario_id} is not among the {len(points)} generated ignitions")
    point = points[scenario_id]
    with _Staging(cfg.output_dir) as stage:
        shared = _prepare(cfg, inputs, stage)
        imp = _run_scenario(point, shared)
    cost = scenario_cost(imp, cfg.costs)
    return scenario_rows([point], [imp], [cost])[0], cfg.output_dir / f"burn_{scenario_id}.asc"


def read_scenarios_csv(path: Path) -> tuple[list[IgnitionPoint], list[ScenarioImpact]]:
    points, impacts = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SCENARIO_COLUMNS:
            raise ParseError(f"expected header {','.join(SCENARIO_COLUMNS)}", path=path, line=1)
        for row in reader:
            if not row:
                continue
            try:
                sid, bid = int(row[0]), int(row[1])
                loc = GeoPoint(float(row[2]), float(row[3]))
                acres, miles, structures = float(row[4]), float(row[5]), int(row[6])
            except (ValueError, IndexError) as exc:
                raise ParseError(str(exc), path=path, line=reader.line_num) from None
            points.append(IgnitionPoint(sid, bid, loc, float("nan")))
            impacts.append(ScenarioImpact(sid, acres, {bid: miles}, structures))
    return points, impacts


def reclassify(cfg: RunConfig, scenarios_csv: Path, topology: Topology | None = None) -> list[LineRisk]:
    """Recompute costs, line risk and heatmap from an existing scenarios.csv."""
    topology = topology or load_topology(cfg.topology)
    points, impacts = read_scenarios_csv(scenarios_csv)
    costs = [scenario_cost(imp, cfg.costs) for imp in impacts]
    with _Staging(cfg.output_dir) as stage:
        line_risks = risk_outputs(topology, costs, points, cfg.policy, stage)
    return line_risks
