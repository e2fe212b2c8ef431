"""Command line entry point: ``culturenet <stage> --config run.json``."""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import CultureNetError, InputError, MissingArtifact, NumericalFailure
from .pipeline import STAGES, Pipeline, load_config

EXIT_OK, EXIT_INPUT, EXIT_MISSING, EXIT_NUMERIC = 0, 2, 3, 4

log = logging.getLogger("culturenet")


def exit_code(exc):
    if isinstance(exc, MissingArtifact):
        return EXIT_MISSING
    if isinstance(exc, NumericalFailure):
        return EXIT_NUMERIC
    if isinstance(exc, InputError):
        return EXIT_INPUT
    # degenerate distances, empty supports and similar data problems
    return EXIT_NUMERIC if isinstance(exc, CultureNetError) else EXIT_INPUT


def build_parser():
    parser = argparse.ArgumentParser(
        prog="culturenet",
        description="Per-country copula graphical models, network distances and cultural maps.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run configuration")
    common.add_argument("--seed", type=int, default=None, help="override the master seed")
    common.add_argument("--countries", default=None,
                        help="comma-separated country codes to process")
    common.add_argument("--verbose", "-v", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in STAGES + ("all",):
        sub.add_parser(name, parents=[common], help=f"run the {name} stage"
                       if name != "all" else "run every stage in order")
    return parser


def run_stage(pipe, stage):
    """Run one stage; returns an exit code."""
    if stage == "infer":
        failures = pipe.infer()
        if failures:
            for c, exc in sorted(failures.items()):
                log.error("%s: %s", c, exc)
            return max(exit_code(e) for e in failures.values())
        return EXIT_OK
    getattr(pipe, stage)()
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(message)s", stream=sys.stderr)
    logging.captureWarnings(True)
    countries = None
    if args.countries:
        countries = [c.strip() for c in args.countries.split(",") if c.strip()]
    try:
        config = load_config(args.config, seed=args.seed, countries=countries)
        pipe = Pipeline(config)
        stages = STAGES if args.command == "all" else (args.command,)
        for stage in stages:
            log.info("stage %s", stage)
            code = run_stage(pipe, stage)
            if code != EXIT_OK:
                return code
    except (CultureNetError, ValueError, OSError) as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return exit_code(exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
