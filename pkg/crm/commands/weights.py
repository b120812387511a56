"""
crm weights

Per-sample kernel weights against the final history, for scatter plots
where each point is drawn proportionally to its share of the estimate.
"""

import argparse
from typing import Dict, Optional

from ..core.io import write_csv
from ..modules.estimator import SampleSequence, WeightVector, history_weights
from ..modules.kernels import WeightScheme
from .options import add_data_argument, add_kernel_arguments, load_data, weight_scheme

NAME = "weights"
HELP = "write the kernel weight of every sample against the final history"
WRITES_DATA = True


def emit_weight_trace(
    seq: SampleSequence, d: int, scheme: WeightScheme, path: Optional[str] = None
) -> WeightVector:
    """
    Write one CSV row per weighted sample z_{i+1}, i in I:
    index (1-based position in seq), x1..x_{k-1}, y (+1/-1) and weight.
    """
    weights = history_weights(seq, d, scheme, seq.history(d))
    inputs = [f"x{j + 1}" for j in range(seq.k - 1)]
    labels = seq.labels

    def rows():
        for i, w in zip(weights.index_set, weights.raw_weights):
            # i ends the history (1-based) and is the 0-based row of z_{i+1}
            yield [int(i) + 1] + [float(v) for v in seq.xs[i]] + [int(labels[i]), float(w)]

    write_csv(path, ["index"] + inputs + ["y", "weight"], rows())
    return weights


def add_arguments(parser: argparse.ArgumentParser) -> None:
    add_data_argument(parser, "sequence file")
    add_kernel_arguments(parser)


def run(args: argparse.Namespace) -> Dict:
    seq = load_data(args)
    weights = emit_weight_trace(seq, args.d, weight_scheme(args, seq.k), args.out)
    return {
        "n": weights.n,
        "total_weight": float(weights.raw_weights.sum()),
        "normalization": weights.normalization,
    }
