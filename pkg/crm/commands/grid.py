"""
crm grid

E[y | x, history] on a regular grid over the emission box, for heat maps of
the next-sample distribution.
"""

import argparse
from typing import Dict, Optional

import numpy as np

from ..core.base import ArgumentError, ConfigError
from ..core.io import write_csv
from ..modules.estimator import SampleSequence
from ..modules.processes import (
    HiddenMarkovSpec,
    StatePosterior,
    forward_posterior,
    history_posterior,
    label_expectation_grid,
    stationary_distribution,
)
from .options import add_data_argument, add_process_arguments, load_data, resolve_process

NAME = "grid"
HELP = "write the label expectation grid of the next sample"
WRITES_DATA = True

STATIONARY = "stationary"
HISTORY = "history"
FULL = "full"
MODES = (STATIONARY, HISTORY, FULL)


def grid_posterior(
    spec: HiddenMarkovSpec, history, d: int, mode: str = HISTORY
) -> StatePosterior:
    """
    Next-state posterior behind the grid.

    stationary ignores the history, history conditions on its last d samples
    and full runs the forward recursion over all of it.
    """
    if mode == STATIONARY:
        return StatePosterior(stationary_distribution(spec))
    seq = history if isinstance(history, SampleSequence) else SampleSequence(history)
    if mode == HISTORY:
        return history_posterior(spec, seq.history(d))
    if mode == FULL:
        return forward_posterior(spec, seq)
    raise ArgumentError(f"Unknown grid mode '{mode}', expected {MODES}")


def emit_distribution_grid(
    spec: HiddenMarkovSpec,
    history,
    d: int,
    resolution: int,
    path: Optional[str] = None,
    mode: str = HISTORY,
) -> np.ndarray:
    """
    Write a resolution x resolution CSV grid of E[y | x, history] with columns
    x1, x2 (box coordinates of the cell centers) and expected_label.

    Returns:
        np.ndarray: the expectations, shape (resolution, resolution), indexed [x1, x2]

    Raises:
        InconsistentObservationError: a history no latent path can emit
    """
    if resolution < 1:
        raise ArgumentError(f"Grid resolution must be positive, got {resolution}")
    posterior = grid_posterior(spec, history, d, mode)
    cells, values = label_expectation_grid(spec, posterior, resolution)
    centers = spec.to_box(cells)
    write_csv(
        path,
        ["x1", "x2", "expected_label"],
        ([float(x[0]), float(x[1]), float(v)] for x, v in zip(centers, values)),
    )
    return values.reshape(resolution, resolution)


def add_arguments(parser: argparse.ArgumentParser) -> None:
    add_process_arguments(parser)
    add_data_argument(parser, "sequence whose end is conditioned on")
    parser.add_argument("--d", type=int, default=1, help="history length")
    parser.add_argument("--resolution", type=int, default=100)
    parser.add_argument("--mode", choices=MODES, default=HISTORY)


def run(args: argparse.Namespace) -> Dict:
    spec = resolve_process(args)
    if args.mode == STATIONARY and not args.data:
        history = None
    else:
        if not args.data:
            raise ConfigError(f"--data is required for grid mode '{args.mode}'")
        history = load_data(args)
    values = emit_distribution_grid(
        spec, history, args.d, args.resolution, args.out, args.mode
    )
    return {
        "mode": args.mode,
        "resolution": args.resolution,
        "min": float(values.min()),
        "max": float(values.max()),
    }
