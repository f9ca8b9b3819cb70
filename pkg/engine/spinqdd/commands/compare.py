"""`compare`: column-wise difference of two runs."""

import argparse
from pathlib import Path

from spinqdd.services.artifacts import compare_runs


def add_parser(subparsers):
    parser = subparsers.add_parser("compare", help="Compare the time series of two run directories")
    parser.add_argument("run_a", type=Path)
    parser.add_argument("run_b", type=Path)
    parser.add_argument("--cols", default="mass,l2_n0,l2_n1,l2_n2,l2_n3", help="Comma-separated columns")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    columns = [c.strip() for c in args.cols.split(",") if c.strip()]
    result = compare_runs(args.run_a, args.run_b, columns)
    print(f"{'column':<12}  {'max |diff|':>14}  {'final |diff|':>14}")
    for col in columns:
        print(f"{col:<12}  {result[col]['max_abs_diff']:14.6e}  {result[col]['final_abs_diff']:14.6e}")
    return 0
