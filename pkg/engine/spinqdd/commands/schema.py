"""`schema`: publish the scenario JSON schema."""

import argparse
from pathlib import Path

from spinqdd.schemas.scenario import Scenario


def add_parser(subparsers):
    parser = subparsers.add_parser("schema", help="Print or write the scenario JSON schema")
    parser.add_argument("--output", type=Path, default=None)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    text = Scenario.schema_json(indent=2)
    if args.output:
        args.output.write_text(text)
    else:
        print(text)
    return 0
