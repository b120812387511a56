"""
Options shared by several subcommands and their resolution into domain objects.
"""

import argparse

from .. import settings
from ..core.base import ConfigError
from ..core.io import read_sequence, read_spec
from ..modules.estimator import LOSS_KINDS, ZERO_ONE, SampleSequence
from ..modules.kernels import FAMILIES, WeightScheme, make_weight_scheme
from ..modules.learners import FALLBACK_ERROR, FALLBACK_UNIFORM
from ..modules.processes import HiddenMarkovSpec, random_chain


def add_process_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("process")
    group.add_argument("--process-spec", help="HiddenMarkovSpec JSON document")
    group.add_argument(
        "--chain-seed",
        type=int,
        help="seed of a random 4-state chain (default: --seed)",
    )


def resolve_process(args: argparse.Namespace) -> HiddenMarkovSpec:
    """The process of --process-spec, else random_chain(--chain-seed or --seed)."""
    if getattr(args, "process_spec", None):
        return read_spec(args.process_spec)
    chain_seed = getattr(args, "chain_seed", None)
    return random_chain(args.seed if chain_seed is None else chain_seed)


def add_data_argument(parser: argparse.ArgumentParser, help_text: str) -> None:
    parser.add_argument("--data", help=help_text)


def load_data(args: argparse.Namespace) -> SampleSequence:
    if not getattr(args, "data", None):
        raise ConfigError("--data <sequence file> is required")
    return read_sequence(args.data)


def add_kernel_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("kernel")
    group.add_argument("--d", type=int, default=1, help="history length")
    group.add_argument(
        "--kernel",
        choices=FAMILIES,
        default=settings.DEFAULT_KERNEL_FAMILY,
        help="weight scheme family",
    )
    group.add_argument(
        "--bandwidth",
        type=float,
        default=0.2,
        help="bandwidth b (base kernel width for stratified-set)",
    )
    group.add_argument("--width", type=float, default=1.0, help="smoothing kernel width")


def weight_scheme(args: argparse.Namespace, k: int) -> WeightScheme:
    return make_weight_scheme(args.kernel, k * args.d, args.bandwidth, args.width)


def add_training_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("training")
    group.add_argument("--ridge", type=float, default=settings.DEFAULT_RIDGE)
    group.add_argument(
        "--fallback",
        choices=(FALLBACK_ERROR, FALLBACK_UNIFORM),
        default=settings.DEFAULT_FALLBACK,
        help="behaviour when every kernel weight vanishes",
    )
    group.add_argument("--loss", choices=LOSS_KINDS, default=ZERO_ONE)
