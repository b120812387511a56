"""
crm evaluate

Score a hypothesis on a simulated sequence: exact conditional risk at the end
of the sequence, marginal risk under the stationary distribution, the Bayes
risk of the posterior and the estimator's value at the final history.
"""

import argparse
import logging
from typing import Dict

from .. import settings
from ..core.base import ConfigError, NoEffectiveSamplesError
from ..core.io import read_hypothesis, write_json
from ..modules.estimator import conditional_risk_estimate
from ..modules.learners import empirical_risk
from ..modules.processes import (
    POLYGON,
    QUADRATURE,
    StatePosterior,
    bayes_risk,
    forward_posterior,
    history_posterior,
    per_state_risks,
    stationary_distribution,
)
from .options import (
    add_data_argument,
    add_kernel_arguments,
    add_process_arguments,
    load_data,
    resolve_process,
    weight_scheme,
)

logger = logging.getLogger(__name__)

NAME = "evaluate"
HELP = "evaluate a hypothesis against the exact conditional risk"
WRITES_DATA = False

FULL = "full"
HISTORY = "history"
EVALUATIONS = (FULL, HISTORY)


def add_arguments(parser: argparse.ArgumentParser) -> None:
    add_process_arguments(parser)
    add_data_argument(parser, "observed sequence file")
    parser.add_argument("--hypothesis", help="hypothesis JSON written by crm train")
    add_kernel_arguments(parser)
    parser.add_argument(
        "--evaluation",
        choices=EVALUATIONS,
        default=settings.DEFAULT_EVALUATION,
        help="condition on the whole sequence or on its last d samples",
    )
    parser.add_argument(
        "--resolution", type=int, default=settings.DEFAULT_QUADRATURE_RESOLUTION
    )
    parser.add_argument(
        "--oracle-method",
        choices=(QUADRATURE, POLYGON),
        default=settings.DEFAULT_ORACLE_METHOD,
    )


def next_state_posterior(spec, seq, d: int, evaluation: str) -> StatePosterior:
    """Posterior of the state that emits the sample following seq."""
    if evaluation == FULL:
        return forward_posterior(spec, seq)
    if evaluation == HISTORY:
        return history_posterior(spec, seq.history(d))
    raise ConfigError(f"Unknown evaluation mode '{evaluation}', expected {EVALUATIONS}")


def run(args: argparse.Namespace) -> Dict:
    if not args.hypothesis:
        raise ConfigError("--hypothesis <json> is required")
    spec = resolve_process(args)
    seq = load_data(args)
    h = read_hypothesis(args.hypothesis)

    posterior = next_state_posterior(spec, seq, args.d, args.evaluation)
    risks = per_state_risks(spec, h, args.resolution, args.oracle_method)
    stationary = stationary_distribution(spec)

    try:
        estimate = conditional_risk_estimate(
            seq, args.d, weight_scheme(args, seq.k), seq.history(args.d), h
        )
    except NoEffectiveSamplesError as e:
        logger.warning(f"Estimator undefined at the final history: {e.message}")
        estimate = None

    result = {
        "evaluation": args.evaluation,
        "posterior": posterior.probs,
        "per_state_risks": risks,
        "conditional_risk": float(min(1.0, max(0.0, posterior.probs @ risks))),
        "marginal_risk": float(min(1.0, max(0.0, stationary @ risks))),
        "bayes_risk": bayes_risk(spec, posterior, args.resolution),
        "empirical_risk": empirical_risk(seq, h),
        "estimated_conditional_risk": estimate,
    }
    if args.out:
        write_json(args.out, result)
    return result
