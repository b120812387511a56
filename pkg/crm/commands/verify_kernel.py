"""
crm verify-kernel

Numerical check of the smoothing kernel axioms for one family and dimension.
"""

import argparse
from typing import Dict

from .. import settings
from ..core.io import write_json
from ..modules.kernels import (
    SMOOTHING_FAMILIES,
    SQEXP,
    KernelSpec,
    QuadratureConfig,
    verify_kernel_axioms,
)

NAME = "verify-kernel"
HELP = "verify the smoothing kernel axioms by grid quadrature"
WRITES_DATA = False


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--family", choices=SMOOTHING_FAMILIES, default=SQEXP)
    parser.add_argument("--dim", type=int, default=1)
    parser.add_argument("--width", type=float, default=1.0)
    parser.add_argument("--radius", type=float, default=settings.DEFAULT_AXIOM_RADIUS)
    parser.add_argument("--resolution", type=int, help="grid points per axis")
    parser.add_argument(
        "--tolerance", type=float, default=settings.DEFAULT_AXIOM_TOLERANCE
    )


def run(args: argparse.Namespace) -> Dict:
    spec = KernelSpec(dim=args.dim, bandwidth_b=1.0, family=args.family, width=args.width)
    quadrature = QuadratureConfig(
        radius=args.radius,
        resolution=args.resolution,
        tolerance=args.tolerance,
        seed=args.seed,
    )
    report = verify_kernel_axioms(spec, quadrature).to_dict()
    if args.out:
        write_json(args.out, report)
    return report
