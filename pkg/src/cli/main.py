"""
Command-line front end.

Subcommands: energy, extend, diagnose, reach, transport. Exit codes:
0 success, 1 malformed or inadmissible input, 2 divergence, 3 invariant
failure (the failed invariant is logged and written to ``failure.json``).
"""

import argparse
import logging
import sys
from typing import List, Optional

from ..config.environment_parser import EnvironmentConfigurationParser
from ..config.run_configuration import RunConfig
from ..loaders.artifact_writer import ArtifactWriter
from ..models.errors import INPUT_EXIT_CODE, InvariantError, InvariantViolation, TubedExtensionError
from .commands import CommandRunner

logger = logging.getLogger(__name__)

MAP_COMMANDS = ("energy", "extend", "transport")
SPEC_COMMANDS = ("diagnose", "reach")


def _setup_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        force=True,
    )


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=["general", "bounded"], help="Estimate mode")
    common.add_argument("--eta", type=float, help="Threshold fraction in (0, 1)")
    common.add_argument("--c1", dest="C1", type=float, help="Calibration constant of the lambda formula")
    common.add_argument("--mesh", type=int, help="Horizontal cells (power of two)")
    common.add_argument("--slab-min", dest="slab_min", type=float, help="Slab floor factor")
    common.add_argument("--deterministic", action="store_true", default=None,
                        help="Byte-identical reports across repeated runs")
    common.add_argument("--threads", type=int, help="Worker threads")
    common.add_argument("--out", dest="output", help="Output directory")
    common.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING or ERROR")
    common.add_argument("--lambda-cap", dest="lambda_cap", type=float, help="Largest lambda used for cubes")
    common.add_argument("--ball-grid", dest="ball_grid", type=int, help="Ball grid cells per axis (0 disables)")
    common.add_argument("--skip-verification", dest="verify", action="store_false", default=None,
                        help="Do not fit the estimate constants on the builtin families")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tubed-extension",
                                     description="Singular extensions of manifold-valued maps")
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_options()
    for name in MAP_COMMANDS:
        sub = subparsers.add_parser(name, parents=[common], help=f"{name} of a boundary map")
        sub.add_argument("map_ref", help="Map file or builtin:<name>")
        sub.add_argument("--manifold", dest="manifold_spec", help="Manifold spec of the map's target")
    for name in SPEC_COMMANDS:
        sub = subparsers.add_parser(name, parents=[common], help=f"{name} of a manifold or metric spec")
        sub.add_argument("manifold_spec", help="Manifold or synthetic-metric spec file")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run the command and translate failures to exit codes.

    Returns:
        Process exit code
    """
    args = build_parser().parse_args(argv)
    overrides = {key: value for key, value in vars(args).items()}
    environment = EnvironmentConfigurationParser()
    try:
        config = environment.build_config(**overrides)
    except ValueError as e:
        _setup_logging("INFO")
        logger.error(f"Invalid configuration: {e}")
        return INPUT_EXIT_CODE
    _setup_logging(config.log_level)
    for warning in environment.validate_environment()["warnings"]:
        logger.warning(warning)

    runner = CommandRunner(config)
    try:
        runner.run()
    except TubedExtensionError as e:
        logger.error(f"{type(e).__name__}: {e}")
        if isinstance(e, InvariantError):
            invariant = e.invariant if isinstance(e, InvariantViolation) else type(e).__name__
            _write_failure(runner.writer, e.exit_code, invariant, str(e))
        return e.exit_code
    except (ValueError, OSError) as e:
        logger.error(f"Input error: {e}")
        return INPUT_EXIT_CODE
    logger.info(f"'{config.command}' finished; wrote {len(runner.writer.written)} files to {config.output}")
    return 0


def _write_failure(writer: ArtifactWriter, exit_code: int, invariant: str, message: str) -> None:
    report = writer.summary(exit_code, invariant)
    report["message"] = message
    writer.write_json("failure.json", report)
    logger.error(f"Failed invariant: {invariant}")


if __name__ == "__main__":
    sys.exit(main())
