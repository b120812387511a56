"""
crm simulate

Draw a sequence from a hidden Markov process and write it in the sequence
text format.
"""

import argparse
import logging
from typing import Dict

from ..core.base import ArgumentError
from ..core.io import write_json, write_sequence
from ..modules.processes import simulate
from .options import add_process_arguments, resolve_process

logger = logging.getLogger(__name__)

NAME = "simulate"
HELP = "simulate a hidden Markov process"
WRITES_DATA = True


def add_arguments(parser: argparse.ArgumentParser) -> None:
    add_process_arguments(parser)
    parser.add_argument("--N", type=int, default=1000, help="number of samples")
    parser.add_argument("--spec-out", help="also write the process spec JSON here")


def run(args: argparse.Namespace) -> Dict:
    if args.N < 1:
        raise ArgumentError(f"--N must be >= 1, got {args.N}")
    spec = resolve_process(args)
    seq = simulate(spec, args.N, args.seed)
    write_sequence(args.out, seq)
    if args.spec_out:
        write_json(args.spec_out, spec.to_dict())
    return {
        "N": seq.N,
        "k": seq.k,
        "seed": args.seed,
        "num_states": spec.num_states,
        "positive_fraction": float((seq.labels > 0).mean()),
        "spec_out": args.spec_out,
    }
