"""
crm train

Fit one learner on a sequence file and write the hypothesis JSON. ECRM
targets the last d samples of the sequence.
"""

import argparse
from typing import Dict

from ..core.io import write_json
from ..modules.learners import ECRM, LEARNERS, TrainConfig, empirical_risk, fit
from .options import (
    add_data_argument,
    add_kernel_arguments,
    add_training_arguments,
    load_data,
    weight_scheme,
)

NAME = "train"
HELP = "fit ECRM, ERM or the sliding-window learner"
WRITES_DATA = True


def add_arguments(parser: argparse.ArgumentParser) -> None:
    add_data_argument(parser, "training sequence file")
    parser.add_argument("--learner", choices=LEARNERS, default=ECRM)
    add_kernel_arguments(parser)
    add_training_arguments(parser)


def run(args: argparse.Namespace) -> Dict:
    seq = load_data(args)
    cfg = TrainConfig(
        d=args.d,
        kernel=weight_scheme(args, seq.k),
        ridge=args.ridge,
        fallback=args.fallback,
        loss_kind=args.loss,
    )
    h = fit(args.learner, seq, cfg)
    write_json(args.out, h.to_dict())
    return {
        "learner": args.learner,
        "d": args.d,
        "kernel": cfg.kernel.to_dict(),
        "hypothesis": h.to_dict(),
        "empirical_risk": empirical_risk(seq, h),
    }
