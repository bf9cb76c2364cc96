"""Command-line entry point.

Exit codes: 0 success, 2 input or validation error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import pipeline
from .config import load_config
from .errors import GridfireError
from .ignition import write_ignition_csv

EXIT_OK, EXIT_INPUT, EXIT_RUNTIME = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, type=Path, help="run configuration JSON")
    common.add_argument("--out", type=Path, help="output directory (overrides output_dir)")
    common.add_argument("--spacing-miles", type=float, help="ignition spacing along each branch")
    common.add_argument("--duration-min", type=float, help="burn duration per scenario, minutes")
    common.add_argument("--policy", choices=("max", "mean"), help="per-line aggregation")
    common.add_argument("--workers", type=int, help="parallel scenario workers")
    common.add_argument("--import-burn-dir", type=Path,
                        help="read burn_<id>.asc rasters from here instead of simulating")
    common.add_argument("--write-rasters", action="store_true", default=None,
                        help="also write burn_<id>.asc for every scenario")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    p = argparse.ArgumentParser(prog="gridfire", description="Wildfire risk screening for power lines.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="load all inputs and print a summary")
    sub.add_parser("ignite", parents=[common], help="write ignitions.csv only")
    sub.add_parser("sweep", parents=[common], help="simulate every ignition and write risk outputs")
    one = sub.add_parser("simulate-one", parents=[common], help="run a single scenario")
    one.add_argument("scenario_id", type=int)
    cls = sub.add_parser("classify", parents=[common], help="recompute line risk from scenarios.csv")
    cls.add_argument("--scenarios", type=Path, help="scenarios.csv to read (default: <out>/scenarios.csv)")
    fx = sub.add_parser("make-fixture", help="write the synthetic 30-bus study area")
    fx.add_argument("directory", type=Path)
    return p


def _overrides(args) -> dict:
    return {
        "output_dir": args.out,
        "spacing_miles": args.spacing_miles,
        "duration_min": args.duration_min,
        "policy": args.policy,
        "workers": args.workers,
        "import_burn_dir": args.import_burn_dir,
        "write_burn_rasters": args.write_rasters,
    }


def _dispatch(args) -> int:
    if args.command == "make-fixture":
        from .fixture import write_fixture

        print(write_fixture(args.directory))
        return EXIT_OK

    cfg = load_config(args.config, _overrides(args))

    if args.command == "classify":
        src = args.scenarios or cfg.output_dir / "scenarios.csv"
        risks = pipeline.reclassify(cfg, src)
        print(f"classified {len(risks)} lines -> {cfg.output_dir}")
        return EXIT_OK

    inputs = pipeline.load_inputs(cfg)
    if args.command == "validate":
        print(pipeline.validation_report(cfg, inputs))
    elif args.command == "ignite":
        points = pipeline.ignitions_for(cfg, inputs)
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        write_ignition_csv(points, cfg.output_dir / "ignitions.csv")
        print(f"{len(points)} ignition points -> {cfg.output_dir / 'ignitions.csv'}")
    elif args.command == "sweep":
        result = pipeline.sweep(cfg, inputs)
        print(f"{len(result.points)} scenarios, {len(result.line_risks)} lines -> {cfg.output_dir}")
    elif args.command == "simulate-one":
        row, raster = pipeline.simulate_one(cfg, args.scenario_id, inputs)
        print(",".join(pipeline.SCENARIO_COLUMNS))
        print(",".join(row))
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return _dispatch(args)
    except GridfireError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except pipeline.ScenarioFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error: {exc.filename}: file not found", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - last-resort runtime failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
