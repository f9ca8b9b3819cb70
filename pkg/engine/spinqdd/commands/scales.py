"""`scales`: dimensionless parameters for a physical device."""

import argparse
import json

from spinqdd.physics.scaling import DeviceParameters, dimensionless_scales


def add_parser(subparsers):
    parser = subparsers.add_parser("scales", help="Compute eps, alpha, tau and tau0 from device data")
    parser.add_argument("--length", type=float, required=True, help="Reference length x0 in m")
    parser.add_argument("--temperature", type=float, required=True, help="Lattice temperature in K")
    parser.add_argument("--mass-ratio", type=float, default=0.067)
    parser.add_argument("--rashba", type=float, default=0.0, help="Rashba constant in eV m")
    parser.add_argument("--relaxation-time", type=float, default=1e-13, help="Momentum relaxation time in s")
    parser.add_argument("--observation-time", type=float, default=0.0, help="Observation time in s (0: energy time)")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    device = DeviceParameters(
        length=args.length,
        temperature=args.temperature,
        mass_ratio=args.mass_ratio,
        rashba=args.rashba,
        relaxation_time=args.relaxation_time,
        observation_time=args.observation_time,
    )
    print(json.dumps(dimensionless_scales(device).to_dict(), indent=2))
    return 0
