"""Run configuration: one JSON file plus command-line overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path

from .errors import ParseError
from .firesim import DEFAULT_ROS_TABLE, SpreadParams
from .ingest import parse_timestamp
from .risk import CostModel

POLICIES = ("max", "mean")
_PATH_KEYS = ("landscape", "weather", "topology", "structures")
_KNOWN_KEYS = set(_PATH_KEYS) | {
    "output_dir", "spacing_miles", "burn_window", "spread", "costs", "policy",
    "workers", "write_burn_rasters", "import_burn_dir",
}


def default_workers() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return os.cpu_count() or 1


@dataclass(frozen=True)
class RunConfig:
    landscape: Path
    weather: Path
    topology: Path
    structures: Path
    output_dir: Path
    burn_start: datetime
    spread: SpreadParams
    costs: CostModel = field(default_factory=CostModel)
    spacing_miles: float = 5.0
    policy: str = "max"
    workers: int = 1
    write_burn_rasters: bool = False
    import_burn_dir: Path | None = None
    source: Path | None = None

    @property
    def duration_min(self) -> float:
        return self.spread.duration_min

    @property
    def burn_window(self) -> tuple[datetime, datetime]:
        return self.burn_start, self.burn_start + timedelta(minutes=self.duration_min)

    def to_dict(self) -> dict:
        s = self.spread
        return {
            "landscape": str(self.landscape),
            "weather": str(self.weather),
            "topology": str(self.topology),
            "structures": str(self.structures),
            "output_dir": str(self.output_dir),
            "spacing_miles": self.spacing_miles,
            "burn_window": {
                "start": self.burn_start.strftime("%Y-%m-%dT%H:%M:%SZ"),
                "duration_min": s.duration_min,
            },
            "spread": {
                "ros_table": {str(k): v for k, v in sorted(s.ros_table.items())},
                "slope_coeff": s.slope_coeff,
                "wind_coeff": s.wind_coeff,
                "wind_exponent": s.wind_exponent,
                "connectivity": s.connectivity,
            },
            "costs": {
                "env_cost_per_acre": self.costs.env_cost_per_acre,
                "line_cost_per_mile": self.costs.line_cost_per_mile,
                "structure_cost": self.costs.structure_cost,
            },
            "policy": self.policy,
            "workers": self.workers,
            "write_burn_rasters": self.write_burn_rasters,
            "import_burn_dir": None if self.import_burn_dir is None else str(self.import_burn_dir),
        }


def load_config(path, overrides: dict | None = None) -> RunConfig:
    """Read a JSON config; relative paths resolve against the config's directory.

    ``overrides`` uses the same keys as the file plus ``duration_min``;
    values that are None are ignored. Override paths resolve against the
    current directory.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ParseError("config file not found", path=path) from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path=path, line=exc.lineno) from None
    if not isinstance(raw, dict):
        raise ParseError("config must be a JSON object", path=path)
    unknown = sorted(set(raw) - _KNOWN_KEYS)
    if unknown:
        raise ParseError(f"unknown config keys: {', '.join(unknown)}", path=path)

    base = path.resolve().parent
    cli = {k: v for k, v in (overrides or {}).items() if v is not None}

    def resolve(value, from_cli):
        p = Path(value)
        return p if p.is_absolute() else ((Path.cwd() if from_cli else base) / p)

    def path_of(key, required=True):
        if key in cli:
            return resolve(cli[key], True)
        if raw.get(key) is None:
            if required:
                raise ParseError(f"missing required key {key!r}", path=path)
            return None
        if not isinstance(raw[key], str):
            raise ParseError(f"{key} must be a path string", path=path)
        return resolve(raw[key], False)

    window = raw.get("burn_window") or {}
    spread = raw.get("spread") or {}
    costs = raw.get("costs") or {}
    for name, section in (("burn_window", window), ("spread", spread), ("costs", costs)):
        if not isinstance(section, dict):
            raise ParseError(f"{name} must be an object", path=path)
    if "start" not in window:
        raise ParseError("burn_window.start is required", path=path)

    try:
        start = parse_timestamp(str(window["start"]))
        duration = float(cli.get("duration_min", window.get("duration_min", 0.0)))
        ros = spread.get("ros_table")
        ros_table = dict(DEFAULT_ROS_TABLE) if ros is None else {int(k): float(v) for k, v in ros.items()}
        params = SpreadParams(
            duration_min=duration,
            ros_table=ros_table,
            slope_coeff=float(spread.get("slope_coeff", 3.0)),
            wind_coeff=float(spread.get("wind_coeff", 0.5)),
            wind_exponent=float(spread.get("wind_exponent", 2.0)),
            connectivity=int(spread.get("connectivity", 16)),
        )
        model = CostModel(**{k: float(v) for k, v in costs.items()})
        spacing = float(cli.get("spacing_miles", raw.get("spacing_miles", 5.0)))
        workers = int(cli.get("workers", raw.get("workers") or default_workers()))
    except (TypeError, ValueError) as exc:
        raise ParseError(f"invalid config value: {exc}", path=path) from None

    policy = cli.get("policy", raw.get("policy", "max"))
    if policy not in POLICIES:
        raise ParseError(f"policy must be one of {', '.join(POLICIES)}, got {policy!r}", path=path)
    if not spacing > 0:
        raise ParseError(f"spacing_miles must be positive, got {spacing}", path=path)
    if workers < 1:
        raise ParseError(f"workers must be >= 1, got {workers}", path=path)

    return RunConfig(
        landscape=path_of("landscape"),
        weather=path_of("weather"),
        topology=path_of("topology"),
        structures=path_of("structures"),
        output_dir=path_of("output_dir", required=False) or base / "out",
        burn_start=start,
        spread=params,
        costs=model,
        spacing_miles=spacing,
        policy=policy,
        workers=workers,
        write_burn_rasters=bool(cli.get("write_burn_rasters", raw.get("write_burn_rasters", False))),
        import_burn_dir=path_of("import_burn_dir", required=False),
        source=path,
    )
