"""`validate`: run the verification catalog."""

import argparse
import logging
from pathlib import Path

from spinqdd.diagnostics.catalog import MUTATION_TARGETS, check_catalog, default_context, mutation_self_test

logger = logging.getLogger(__name__)


def _floats(text: str):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got '{text}'")


def add_parser(subparsers):
    parser = subparsers.add_parser("validate", help="Run the verification catalog")
    parser.add_argument("--only", action="append", default=None, help="Run checks whose name contains this pattern")
    parser.add_argument("--skip-slow", action="store_true", help="Skip the phase-space heavy checks")
    parser.add_argument("--report", type=Path, default=None, help="Write the JSON report here")
    parser.add_argument("--eps", type=_floats, default=None, help="Decreasing eps levels for ratio tests, e.g. 0.2,0.1,0.05")
    parser.add_argument("--ratio", action="store_true", help="Print observed convergence orders")
    parser.add_argument("--scenario", default="smooth_a", help="Primary scenario")
    parser.add_argument("--secondary", default="smooth_b", help="Second scenario for the recursion checks")
    parser.add_argument("--mutation", choices=MUTATION_TARGETS, default=None, help="Mutation self-test target")
    parser.add_argument("--workers", type=int, default=None, help="Concurrent checks (default: MAX_WORKERS)")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    ctx = default_context(args.scenario, args.secondary, args.eps)

    if args.mutation:
        result = mutation_self_test(ctx, args.mutation, args.only, max_workers=args.workers)
        print(result.report.table())
        if result.detected:
            print(f"[mutation] negated {result.target} caught by: {', '.join(result.failing)}")
            return 0
        if not result.failing:
            print(f"[mutation] negated {result.target} went unnoticed")
        else:
            print(f"[mutation] checks not declaring {result.target} failed: {', '.join(result.untagged)}")
        return 1

    report = check_catalog(ctx, args.only, args.skip_slow, args.workers)
    print(report.table())
    if args.ratio:
        print(f"observed orders at eps = {', '.join(f'{e:g}' for e in ctx.eps_levels)}")
        for c in report.checks:
            if c.orders:
                print(f"  {c.name}: " + ", ".join(f"{k}={v:.3f}" for k, v in c.orders.items()))
    if args.report:
        args.report.parent.mkdir(parents=True, exist_ok=True)
        args.report.write_text(report.json(indent=2))
        logger.info(f"Report written to {args.report}")
    return 0 if report.ok else 1
