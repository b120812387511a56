"""
crm compare

ECRM versus ERM and the sliding-window baseline over a set of random
chains: every chain is simulated, every (d, bandwidth, learner) cell fitted
on the sequence and scored with the exact conditional 0/1 risk of the next
sample.

Chains run in a thread pool; rows are sorted before writing so the CSV
never depends on scheduling.
"""

import argparse
import dataclasses
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from rich.console import Console
from rich.table import Table

from .. import settings
from ..core.base import ConfigError, CRMError, classify_error
from ..core.io import read_json, read_spec, write_csv, write_json
from ..core.utils import parse_float_list, parse_int_list
from ..modules.estimator import ZERO_ONE, Hypothesis
from ..modules.kernels import FAMILIES, make_weight_scheme
from ..modules.learners import (
    ECRM,
    ERM,
    FALLBACK_ERROR,
    FALLBACK_UNIFORM,
    LEARNERS,
    SLIDING_WINDOW,
    TrainConfig,
    ecrm_fit,
    erm_fit,
    sliding_window_fit,
)
from ..modules.processes import (
    POLYGON,
    QUADRATURE,
    HiddenMarkovSpec,
    per_state_risks,
    random_chain,
    simulate,
    stationary_distribution,
)
from .evaluate import EVALUATIONS, next_state_posterior

logger = logging.getLogger(__name__)

NAME = "compare"
HELP = "compare ECRM, ERM and sliding window over random chains"
WRITES_DATA = True

HEADER = [
    "seed",
    "d",
    "bandwidth",
    "learner",
    "conditional_risk",
    "marginal_risk",
    "wall_time_ms",
    "error",
]


@dataclass
class ExperimentConfig:
    """The comparison protocol."""

    chain_seeds: List[int] = field(default_factory=lambda: list(range(1, 21)))
    process_spec: Optional[str] = None
    n_train: int = settings.DEFAULT_N_TRAIN
    history_lengths: List[int] = field(
        default_factory=lambda: list(settings.DEFAULT_HISTORY_LENGTHS)
    )
    bandwidths: List[float] = field(
        default_factory=lambda: list(settings.DEFAULT_BANDWIDTHS)
    )
    kernel_family: str = settings.DEFAULT_KERNEL_FAMILY
    kernel_width: float = 1.0
    learners: List[str] = field(default_factory=lambda: list(settings.DEFAULT_LEARNERS))
    evaluation: str = settings.DEFAULT_EVALUATION
    resolution: int = settings.DEFAULT_QUADRATURE_RESOLUTION
    oracle_method: str = settings.DEFAULT_ORACLE_METHOD
    ridge: float = settings.DEFAULT_RIDGE
    fallback: str = settings.DEFAULT_FALLBACK
    master_seed: int = 0
    workers: int = 1
    timing: bool = False
    out: Optional[str] = None

    def validate(self) -> "ExperimentConfig":
        """
        Raises:
            ConfigError: on the first invalid field
        """
        if not self.chain_seeds:
            raise ConfigError("At least one chain seed is required")
        if not self.learners:
            raise ConfigError("The learner list must not be empty")
        unknown = [name for name in self.learners if name not in LEARNERS]
        if unknown:
            raise ConfigError(f"Unknown learners {unknown}, expected a subset of {LEARNERS}")
        if self.n_train < 1:
            raise ConfigError(f"n_train must be positive, got {self.n_train}")
        if not self.history_lengths or min(self.history_lengths) < 1:
            raise ConfigError(f"History lengths must be positive, got {self.history_lengths}")
        if not self.bandwidths or min(self.bandwidths) <= 0:
            raise ConfigError(f"Bandwidths must be positive, got {self.bandwidths}")
        if self.kernel_family not in FAMILIES:
            raise ConfigError(f"Unknown kernel family '{self.kernel_family}'")
        if self.kernel_width <= 0:
            raise ConfigError(f"kernel_width must be positive, got {self.kernel_width}")
        if self.evaluation not in EVALUATIONS:
            raise ConfigError(f"Unknown evaluation '{self.evaluation}', expected {EVALUATIONS}")
        if self.oracle_method not in (QUADRATURE, POLYGON):
            raise ConfigError(f"Unknown oracle method '{self.oracle_method}'")
        if self.resolution < 1:
            raise ConfigError(f"resolution must be positive, got {self.resolution}")
        if self.ridge < 0:
            raise ConfigError(f"ridge must be non-negative, got {self.ridge}")
        if self.fallback not in (FALLBACK_ERROR, FALLBACK_UNIFORM):
            raise ConfigError(f"Unknown fallback '{self.fallback}'")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        return self

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"Unknown experiment config keys: {unknown}")
        return cls(**data).validate()

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)


@dataclass
class ComparisonRow:
    seed: int
    d: int
    bandwidth: float
    learner: str
    conditional_risk: Optional[float] = None
    marginal_risk: Optional[float] = None
    wall_time_ms: Optional[float] = None
    error: str = ""

    def sort_key(self):
        return (self.seed, self.d, self.bandwidth, self.learner)

    def values(self) -> List[Any]:
        return [
            self.seed,
            self.d,
            self.bandwidth,
            self.learner,
            self.conditional_risk,
            self.marginal_risk,
            self.wall_time_ms,
            self.error,
        ]


def simulation_seed(master_seed: int, chain_seed: int) -> int:
    """One independent RNG stream per (master seed, chain)."""
    return int(np.random.SeedSequence([master_seed, chain_seed]).generate_state(1)[0])


def _describe(e: Exception) -> str:
    _, error_type = classify_error(e)
    message = e.message if isinstance(e, CRMError) else str(e)
    return f"{error_type}: {message}"


def run_chain(
    cfg: ExperimentConfig, chain_seed: int, spec: Optional[HiddenMarkovSpec] = None
) -> List[ComparisonRow]:
    """
    Every (d, bandwidth, learner) row of one chain.

    Fit or oracle failures become rows carrying an error message.
    """
    spec = spec if spec is not None else random_chain(chain_seed)
    seq = simulate(spec, cfg.n_train, simulation_seed(cfg.master_seed, chain_seed))
    stationary = stationary_distribution(spec)
    logger.debug(f"Chain {chain_seed}: simulated {seq.N} samples")

    def score(h: Hypothesis, posterior):
        risks = per_state_risks(spec, h, cfg.resolution, cfg.oracle_method)
        return (
            float(np.clip(posterior.probs @ risks, 0.0, 1.0)),
            float(np.clip(stationary @ risks, 0.0, 1.0)),
        )

    rows = []
    cache = {}
    for d in cfg.history_lengths:
        try:
            posterior = next_state_posterior(spec, seq, d, cfg.evaluation)
        except CRMError as e:
            posterior_error = _describe(e)
            posterior = None
        for bandwidth in cfg.bandwidths:
            for learner in cfg.learners:
                row = ComparisonRow(chain_seed, d, bandwidth, learner)
                rows.append(row)
                if posterior is None:
                    row.error = posterior_error
                    continue
                # ERM ignores (d, b), the sliding window ignores b
                key = {ERM: (ERM,), SLIDING_WINDOW: (SLIDING_WINDOW, d)}.get(
                    learner, (ECRM, d, bandwidth)
                )
                started = time.perf_counter()
                try:
                    if key not in cache:
                        cache[key] = _fit(cfg, learner, seq, d, bandwidth)
                    row.conditional_risk, row.marginal_risk = score(cache[key], posterior)
                except Exception as e:
                    row.error = _describe(e)
                    logger.debug(f"Chain {chain_seed} d={d} b={bandwidth} {learner}: {row.error}")
                if cfg.timing:
                    row.wall_time_ms = (time.perf_counter() - started) * 1000.0
    return rows


def _fit(cfg: ExperimentConfig, learner: str, seq, d: int, bandwidth: float) -> Hypothesis:
    if learner == ERM:
        return erm_fit(seq, cfg.ridge, ZERO_ONE)
    if learner == SLIDING_WINDOW:
        return sliding_window_fit(seq, d, cfg.ridge, ZERO_ONE)
    scheme = make_weight_scheme(cfg.kernel_family, seq.k * d, bandwidth, cfg.kernel_width)
    train_cfg = TrainConfig(d=d, kernel=scheme, ridge=cfg.ridge, fallback=cfg.fallback)
    return ecrm_fit(seq, seq.history(d), train_cfg)


def run_comparison(cfg: ExperimentConfig) -> List[ComparisonRow]:
    """
    All rows of the comparison, in canonical (seed, d, bandwidth, learner) order.

    Row count is |seeds| x |d list| x |bandwidths| x |learners|.
    """
    cfg.validate()
    spec = read_spec(cfg.process_spec) if cfg.process_spec else None
    logger.info(
        f"Comparing {cfg.learners} on {len(cfg.chain_seeds)} chains "
        f"(N={cfg.n_train}, d={cfg.history_lengths}, b={cfg.bandwidths}, workers={cfg.workers})"
    )
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        chains = list(pool.map(lambda seed: run_chain(cfg, seed, spec), cfg.chain_seeds))
    rows = sorted((row for chain in chains for row in chain), key=ComparisonRow.sort_key)
    failed = sum(1 for row in rows if row.error)
    if failed:
        logger.warning(f"{failed} of {len(rows)} rows carry an error")
    return rows


def best_per_chain(rows: List[ComparisonRow], learner: str, d: int) -> Dict[int, float]:
    """Lowest conditional risk over bandwidths for every chain."""
    best: Dict[int, float] = {}
    for row in rows:
        if row.learner != learner or row.d != d or row.conditional_risk is None:
            continue
        best[row.seed] = min(best.get(row.seed, np.inf), row.conditional_risk)
    return best


def summarize(rows: List[ComparisonRow]) -> Dict[str, Dict[str, Any]]:
    """
    Per history length: median over chains of each learner's best-bandwidth
    conditional risk, and the share of chains where ECRM beats ERM.
    """
    summary = {}
    for d in sorted({row.d for row in rows}):
        entry: Dict[str, Any] = {}
        best = {name: best_per_chain(rows, name, d) for name in sorted({r.learner for r in rows})}
        for name, per_chain in best.items():
            entry[name] = float(np.median(list(per_chain.values()))) if per_chain else None
        if best.get(ECRM) and best.get(ERM):
            shared = sorted(set(best[ECRM]) & set(best[ERM]))
            wins = sum(1 for seed in shared if best[ECRM][seed] < best[ERM][seed])
            entry["ecrm_beats_erm"] = wins / len(shared) if shared else None
        summary[f"d={d}"] = entry
    return summary


def summary_table(summary: Dict[str, Dict[str, Any]]) -> Table:
    table = Table(title="Median best-bandwidth conditional risk")
    learners = sorted({key for entry in summary.values() for key in entry})
    table.add_column("history")
    for name in learners:
        table.add_column(name, justify="right")
    for d, entry in summary.items():
        cells = [entry.get(name) for name in learners]
        table.add_row(d, *["-" if v is None else f"{v:.4f}" for v in cells])
    return table


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--chain-seeds", help="comma separated random chain seeds (default 1..20)")
    parser.add_argument("--process-spec", help="use this spec for every chain instead of random chains")
    parser.add_argument("--n-train", type=int)
    parser.add_argument("--history-lengths", help="comma separated d values")
    parser.add_argument("--bandwidths", help="comma separated bandwidths")
    parser.add_argument("--kernel-family", choices=FAMILIES)
    parser.add_argument("--kernel-width", type=float)
    parser.add_argument("--learners", help=f"comma separated subset of {','.join(LEARNERS)}")
    parser.add_argument("--evaluation", choices=EVALUATIONS)
    parser.add_argument("--resolution", type=int)
    parser.add_argument("--oracle-method", choices=(QUADRATURE, POLYGON))
    parser.add_argument("--ridge", type=float)
    parser.add_argument("--fallback", choices=(FALLBACK_ERROR, FALLBACK_UNIFORM))
    parser.add_argument("--workers", type=int)
    parser.add_argument(
        "--timing", action="store_true", default=None, help="fill the wall_time_ms column"
    )


LIST_OPTIONS = {
    "chain_seeds": parse_int_list,
    "history_lengths": parse_int_list,
    "bandwidths": parse_float_list,
    "learners": lambda text: [item.strip() for item in text.split(",") if item.strip()],
}


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """--config file values, overridden by explicit command line flags."""
    data = dict(read_json(args.config)) if args.config else {}
    for name in (f.name for f in dataclasses.fields(ExperimentConfig)):
        value = getattr(args, name, None)
        if value is None or name == "out":
            continue
        try:
            data[name] = LIST_OPTIONS[name](value) if name in LIST_OPTIONS else value
        except ValueError as e:
            raise ConfigError(f"Invalid --{name.replace('_', '-')}: {e}")
    if args.out:
        data["out"] = args.out
    data.setdefault("master_seed", args.seed)
    if getattr(args, "seed_given", False):
        data["master_seed"] = args.seed
    return ExperimentConfig.from_dict(data)


def sidecar_path(out: str) -> str:
    return os.path.splitext(out)[0] + ".json"


def run(args: argparse.Namespace) -> Dict:
    cfg = config_from_args(args)
    rows = run_comparison(cfg)
    write_csv(cfg.out, HEADER, (row.values() for row in rows))
    summary = summarize(rows)
    sidecar = None
    if cfg.out not in (None, "", "-"):
        sidecar = sidecar_path(cfg.out)
        write_json(
            sidecar,
            {
                "config": cfg.to_dict(),
                "run_timestamp": settings.run_timestamp(),
                "rows": len(rows),
                "errors": sum(1 for row in rows if row.error),
                "summary": summary,
            },
        )
    if sys.stderr.isatty():
        Console(stderr=True).print(summary_table(summary))
    return {"rows": len(rows), "summary": summary, "sidecar": sidecar}
