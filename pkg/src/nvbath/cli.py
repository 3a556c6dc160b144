"""Command-line entry point ``nvbath``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .config import load_config_file, preset_sections
from .exceptions import ConfigError, NumericalError
from .models.cpt import PRESETS
from .scenarios import ResultTable, RunResult, run_scenario

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4
WORKERS_ENV = "NVBATH_WORKERS"

log = logging.getLogger("nvbath")


def format_value(x: float) -> str:
    """Shortest text that round-trips a float exactly (``repr`` of a float64)."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def table_text(table: ResultTable) -> str:
    lines = [table.header]
    lines.extend(",".join(format_value(v) for v in row) for row in table.rows)
    return "\n".join(lines) + "\n"


def _plain(obj):
    """Summary values as plain Python scalars, lists and dicts."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_results(result: RunResult, directory, summary_format: str = "yaml",
                  metadata: dict = None) -> list:
    """Write one CSV per table and a run summary; returns the written paths.

    Raises
    ------
    OSError
        If the directory cannot be created or a file cannot be written; the
        message names the path.
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for table in result.tables:
        path = out / f"{table.name}.csv"
        path.write_text(table_text(table), encoding="utf-8")
        written.append(path)
    summary = {"metadata": dict(metadata or {}), "results": _plain(result.summary),
               "tables": [t.name for t in result.tables]}
    if summary_format == "json":
        path = out / "summary.json"
        path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    else:
        path = out / "summary.yaml"
        path.write_text(yaml.safe_dump(summary, sort_keys=True), encoding="utf-8")
    written.append(path)
    return written


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return value


def _cmd_run(args) -> int:
    cfg = load_config_file(args.config, args.preset)
    workers = args.workers if args.workers is not None else default_workers()
    if workers < 1:
        raise ConfigError("--workers must be a positive integer")
    result = run_scenario(cfg, workers=workers)
    metadata = {"scenario": cfg.scenario, "preset": cfg.preset, "version": __version__,
                "config_sha256": cfg.digest,
                "sweep": None if cfg.sweep is None else cfg.sweep.path}
    out = args.out or cfg.output_dir
    for path in write_results(result, out, cfg.summary_format, metadata):
        log.info("wrote %s", path)
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = load_config_file(args.config, args.preset)
    points = 1 if cfg.sweep is None else len(cfg.sweep.values)
    print(f"{args.config}: valid {cfg.scenario} configuration, {points} point(s), "
          f"sha256 {cfg.digest}")
    return EXIT_OK


def _cmd_presets(args) -> int:
    for name in sorted(PRESETS):
        preset = PRESETS[name]()
        print(f"{name}: {preset.description}")
        for section, values in preset_sections(name).items():
            for key, value in values.items():
                print(f"  {section}.{key} = {value}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nvbath", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate a scenario and write result tables")
    run.add_argument("config")
    run.add_argument("--preset", choices=sorted(PRESETS))
    run.add_argument("--out", help="output directory (overrides output.directory)")
    run.add_argument("--workers", type=int,
                     help=f"parallel sweep workers (default ${WORKERS_ENV} or 1)")
    run.set_defaults(func=_cmd_run)

    validate = sub.add_parser("validate", help="check a configuration without running it")
    validate.add_argument("config")
    validate.add_argument("--preset", choices=sorted(PRESETS))
    validate.set_defaults(func=_cmd_validate)

    presets = sub.add_parser("presets", help="list built-in parameter presets (internal units)")
    presets.set_defaults(func=_cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except NumericalError as exc:
        log.error("numerical failure (%s): %s", type(exc).__name__, exc)
        return EXIT_NUMERICAL
    except np.linalg.LinAlgError as exc:
        log.error("numerical failure (linear algebra): %s", exc)
        return EXIT_NUMERICAL
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    except ValueError as exc:
        # model constructors reject inconsistent parameter combinations
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
