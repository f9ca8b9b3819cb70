"""`run`: integrate one scenario and write its artifacts."""

import argparse
import logging
from pathlib import Path

from spinqdd.services.runner import run_scenario
from spinqdd.services.scenarios import list_scenarios, load_scenario

logger = logging.getLogger(__name__)


def add_parser(subparsers):
    parser = subparsers.add_parser("run", help="Run a scenario file or a shipped scenario by name")
    parser.add_argument("scenario", nargs="?", help="Scenario JSON file or shipped scenario name")
    parser.add_argument("--output", type=Path, default=None, help="Output root (default: OUTPUT_ROOT)")
    parser.add_argument("--label", default=None, help="Run directory name (default: scenario name)")
    parser.add_argument("--list", action="store_true", help="List the shipped scenarios and exit")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    if args.list or not args.scenario:
        for name in list_scenarios():
            print(name)
        return 0
    scenario = load_scenario(args.scenario)
    result = run_scenario(scenario, args.output, args.label)
    print(f"[ok] {scenario.name}: {len(result.rows)} rows in {result.directory}")
    for key, value in sorted(result.manifest.summary.items()):
        print(f"  {key} = {value}")
    return 0
