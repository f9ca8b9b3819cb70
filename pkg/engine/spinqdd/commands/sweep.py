"""`sweep`: independent runs over one scenario parameter."""

import argparse
from pathlib import Path

from spinqdd.schemas.scenario import PhysicsParams
from spinqdd.services.runner import run_sweep
from spinqdd.services.scenarios import load_scenario


def add_parser(subparsers):
    parser = subparsers.add_parser("sweep", help="Run a scenario once per parameter value")
    parser.add_argument("scenario")
    parser.add_argument("--param", required=True, help="Dotted scenario path, e.g. physics.tau (bare physics names allowed)")
    parser.add_argument("--values", type=float, nargs="+", required=True)
    parser.add_argument("--output", type=Path, default=None)
    parser.add_argument("--workers", type=int, default=None)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    param = args.param
    if "." not in param and param in PhysicsParams.__fields__:
        param = f"physics.{param}"
    scenario = load_scenario(args.scenario)
    results = run_sweep(scenario, param, args.values, args.output, args.workers)
    failed = 0
    for value, directory, error in results:
        if error:
            failed += 1
            print(f"[error] {param}={value:g}: {error}")
        else:
            print(f"[ok] {param}={value:g}: {directory}")
    return 1 if failed else 0
