"""Command-line entry point."""

import argparse
import logging
import sys
from typing import List, Optional

from spinqdd.commands import compare, run, scales, schema, sweep, validate
from spinqdd.core.config import settings
from spinqdd.core.errors import ConfigurationError, ScenarioError, SpinQDDError

logger = logging.getLogger(__name__)

COMMANDS = (run, validate, compare, sweep, schema, scales)

# Exit codes
EXIT_FAILED = 1
EXIT_INVALID_INPUT = 2


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(prog=settings.PROJECT_NAME, description="Spin-resolved quantum drift-diffusion suite.")
    parser.add_argument("--log-level", default=settings.LOG_LEVEL, help="Logging level (default: LOG_LEVEL)")
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.VERSION}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.add_parser(subparsers)
    return parser.parse_args(argv)


def main(argv: Optional[List[str]] = None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except (ScenarioError, ConfigurationError) as exc:
        logger.debug(exc.to_dict())
        print(f"[error] {exc.detail}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except SpinQDDError as exc:
        logger.debug(exc.to_dict())
        print(f"[error] {exc.detail}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
