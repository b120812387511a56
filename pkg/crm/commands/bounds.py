"""
crm bounds

Evaluate the concentration bound for the parameters of a JSON document,
optionally along the decay schedule for a grid of sample sizes.
"""

import argparse
from typing import Dict

from ..core.base import ConfigError
from ..core.io import read_json, write_csv
from ..core.utils import parse_int_list
from ..modules.bounds import bound_table, params_from_config, scaling_check

NAME = "bounds"
HELP = "evaluate the finite-sample concentration bound"
WRITES_DATA = True

TERMS = ["t1", "t2", "t3", "covering", "term1", "term2", "total", "log_total"]


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--params", help="bound parameters JSON")
    parser.add_argument(
        "--scaling-grid",
        help="comma separated sample sizes, e.g. 1e4,1e8,1e12 (replaces N, b, mu, a)",
    )


def run(args: argparse.Namespace) -> Dict:
    if not args.params:
        raise ConfigError("--params <json> is required")
    params = params_from_config(read_json(args.params))
    if not args.scaling_grid:
        terms = bound_table(params)
        write_csv(args.out, TERMS, [[terms[name] for name in TERMS]])
        return {"mu": params.mu, "a": params.a, **terms}

    try:
        grid = parse_int_list(args.scaling_grid)
    except ValueError as e:
        raise ConfigError(f"Invalid --scaling-grid: {e}")
    rows = scaling_check(grid, params.d, params)
    write_csv(
        args.out,
        ["N", "mu", "a", "b"] + TERMS + ["error"],
        (
            [row.N, row.mu, row.a, row.b]
            + [row.terms.get(name) for name in TERMS]
            + [row.error]
            for row in rows
        ),
    )
    return {"rows": len(rows), "vacuous": sum(1 for row in rows if row.error)}
