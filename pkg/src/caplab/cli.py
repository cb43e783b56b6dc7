"""Command-line entry point: caplab <task> <config.json> [options]."""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .config import TASKS, load_config
from .errors import CaplabError, ConfigError
from .report import EXIT_CONFIG, EXIT_NUMERICAL, run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="caplab",
        description="Hyperbolicity verdicts and capacity bounds for "
                    "warped-product comparison constellations.",
    )
    parser.add_argument("task", choices=TASKS, help="task to run")
    parser.add_argument("config", help="path to the JSON job file")
    parser.add_argument("--out", metavar="PATH", default=None,
                        help="artifact path (overrides the config's output)")
    parser.add_argument("--grid", metavar="N", type=int, default=None,
                        help="grid points for the table task")
    parser.add_argument("--seed", metavar="S", type=int, default=0,
                        help="seed for the randomized verification tuples")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        job = load_config(args.config)
        if job.task != args.task:
            raise ConfigError("/task", f"config says {job.task!r} but the command "
                                       f"line asked for {args.task!r}")
        return run(job, out=args.out, grid=args.grid, seed=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CaplabError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
