"""Command-line entry point of the benchmark harness."""

from __future__ import annotations

import argparse
from collections.abc import Sequence
import logging
from pathlib import Path
import sys
from typing import Any

from .aggregate import format_summary_line
from .config import load_json_config, parse_config
from .const import (
    CONF_ATTRIBUTES,
    CONF_GRAPH,
    CONF_M_VALUES,
    CONF_OUTPUT,
    CONF_P_TERM,
    CONF_SCHEMES,
    CONF_SEED,
    CONF_SIGMA,
    CONF_TASK,
    CONF_TEST_FRACTION,
    CONF_TRIALS,
    CONF_WALK_LENGTH,
    CONF_WORKERS,
    TASKS,
)
from .errors import RepellingWalksError
from .runner import ExperimentRunner

_LOGGER = logging.getLogger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

# argparse destination -> config key
_FLAG_KEYS: dict[str, str] = {
    "task": CONF_TASK,
    "graph": CONF_GRAPH,
    "schemes": CONF_SCHEMES,
    "m": CONF_M_VALUES,
    "pterm": CONF_P_TERM,
    "sigma": CONF_SIGMA,
    "walk_len": CONF_WALK_LENGTH,
    "trials": CONF_TRIALS,
    "seed": CONF_SEED,
    "out": CONF_OUTPUT,
    "workers": CONF_WORKERS,
    "attributes": CONF_ATTRIBUTES,
    "test_fraction": CONF_TEST_FRACTION,
}


def build_parser() -> argparse.ArgumentParser:
    """Argument parser; unset flags stay None so a JSON config can supply them."""
    parser = argparse.ArgumentParser(
        prog="repelling-bench",
        description="Compare i.i.d., antithetic and repelling random walk estimators on a graph.",
    )
    parser.add_argument("--config", type=Path, help="JSON file with default settings")
    parser.add_argument("--task", choices=TASKS)
    parser.add_argument("--graph", help="corpus name, generator spec (e.g. er:n=100,p=0.4,seed=7) or edge-list path")
    parser.add_argument("--schemes", help="comma-separated scheme codes: iid,a,r,ar,tr")
    parser.add_argument("--m", help="comma-separated walker counts")
    parser.add_argument("--pterm", type=float, help="termination probability per step")
    parser.add_argument("--sigma", type=float, help="kernel regulariser")
    parser.add_argument("--walk-len", dest="walk_len", type=int, help="nodes per graphlet walk")
    parser.add_argument("--trials", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", help="CSV output path")
    parser.add_argument("--workers", type=int)
    parser.add_argument("--attributes", help="node attribute file for kernel regression")
    parser.add_argument("--test-fraction", dest="test_fraction", type=float)
    parser.add_argument("--log-level", dest="log_level", choices=LOG_LEVELS, default="WARNING")
    return parser


def collect_settings(args: argparse.Namespace) -> dict[str, Any]:
    """Merge the JSON config with flags given on the command line; flags win."""
    data: dict[str, Any] = dict(load_json_config(args.config)) if args.config is not None else {}
    for dest, key in _FLAG_KEYS.items():
        value = getattr(args, dest)
        if value is not None:
            data[key] = value
    return data


def main(argv: Sequence[str] | None = None) -> int:
    """Run one benchmark and print its summary; returns the process exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")

    try:
        config = parse_config(collect_settings(args))
        result = ExperimentRunner(config).run()
    except (RepellingWalksError, OSError) as err:
        _LOGGER.debug("Benchmark failed", exc_info=True)
        print(f"error: {err}", file=sys.stderr)
        return 1

    for row in result.summary:
        print(format_summary_line(row))
    return 0
