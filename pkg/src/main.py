import argparse
import sys
from typing import List, Optional

import uvicorn
from loguru import logger

from .errors import BakerDimError, ConfigError, TelescopingError
from .experiment_config import SCENARIOS, ExperimentConfigFile
from .experiments import ExperimentRunner

EXIT_PASS = 0
EXIT_USAGE = 1
EXIT_VERDICT = 2


class BakerDimParser(argparse.ArgumentParser):
    """argument parser whose usage errors exit with status 1"""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        logger.error(f"[cli] {message}")
        sys.exit(EXIT_USAGE)


def build_parser() -> BakerDimParser:
    parser = BakerDimParser(prog="bakerdim",
                            description="dimension experiments on the coupled skinny baker's map")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=BakerDimParser)

    for scenario in SCENARIOS:
        scenario_parser = sub.add_parser(scenario, help=f"run the {scenario} scenario")
        scenario_parser.add_argument("--config", required=True, help="path to a key = value config file")
        scenario_parser.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        scenario_parser.add_argument("--out", default=None, help="overrides the config output_dir")
        scenario_parser.add_argument("--threads", type=int, default=None, help="overrides the config threads")
        scenario_parser.add_argument("--verbose", action="store_true", help="debug logging")

    serve = sub.add_parser("serve", help="start the run service")
    serve.add_argument("--host", default="0.0.0.0")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--verbose", action="store_true", help="debug logging")
    return parser


def configure_logging(verbose: bool) -> None:
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if verbose else "INFO")


def run_scenario(args: argparse.Namespace) -> int:
    """
    runs one scenario from the command line

    Returns:
        process exit code: 0 when every verdict passes, 2 on a verdict failure, 1 on a config error
    """
    try:
        config = ExperimentConfigFile(args.config).parse()
        if config.scenario != args.command:
            raise ConfigError(f"config is for scenario {config.scenario!r}, not {args.command!r}")
        config = config.with_overrides(seed=args.seed, output_dir=args.out, threads=args.threads)
    except ConfigError as e:
        logger.error(f"[cli] {e}")
        return EXIT_USAGE

    try:
        manifest = ExperimentRunner(config).run()
    except TelescopingError as e:
        logger.error(f"[cli] {e}")
        return EXIT_VERDICT
    except ConfigError as e:
        logger.error(f"[cli] {e}")
        return EXIT_USAGE
    except BakerDimError as e:
        logger.error(f"[cli] run aborted: {e}")
        return EXIT_VERDICT

    return EXIT_PASS if manifest.passed else EXIT_VERDICT


def serve(args: argparse.Namespace) -> int:
    from . import fastapi_server

    uvicorn.run(
        fastapi_server.app,
        host=args.host,
        port=args.port,
        reload=False,
        lifespan="on"
    )
    return EXIT_PASS


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    if args.command == "serve":
        return serve(args)
    return run_scenario(args)


if __name__ == "__main__":
    sys.exit(main())
