"""
Empirical conditional risk estimator

R-hat(h, z_bar) = q-hat / p-hat with

    q-hat = 1/(n b^d) sum_{i in I} loss(h, z_{i+1}) K((z_bar - z_{i-d+1}^i) / b)
    p-hat = 1/(n b^d) sum_{i in I} K((z_bar - z_{i-d+1}^i) / b)

over the index set I = {d, ..., N-1} (1-based), n = |I| = N - d. Histories are
flattened oldest-first, k coordinates per time step. The stratified set
path uses similarity weights and drops the 1/b^d factor, the ratio cancels it.

Samples live in [0, 1]^k; the last coordinate carries the label
(>= 0.5 means +1, below means -1) and the first k-1 coordinates are the
predictor inputs.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from .. import settings
from ..core.base import ArgumentError, NoEffectiveSamplesError
from .kernels import (
    LabeledHistory,
    StratifiedSetSpec,
    WeightScheme,
    eval_kernel,
    stratified_window_weights,
)

logger = logging.getLogger(__name__)

ZERO_ONE = "zero-one"
CLIPPED_SQUARED = "clipped-squared"
LOSS_KINDS = (ZERO_ONE, CLIPPED_SQUARED)


def label_of(y01) -> np.ndarray:
    """Decode the label coordinate: +1 where y01 >= 0.5, -1 elsewhere."""
    return np.where(np.asarray(y01, dtype=float) >= 0.5, 1, -1)


def sign(values) -> np.ndarray:
    """Sign with sign(0) = +1."""
    return np.where(np.asarray(values, dtype=float) >= 0.0, 1, -1)


@dataclass
class SampleSequence:
    """An ordered realization z_1..z_N in [0, 1]^k, optionally with latent states."""

    points: np.ndarray
    latent_states: Optional[np.ndarray] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ArgumentError(f"A sequence needs shape (N, k) with N >= 1, got {pts.shape}")
        if not np.all(np.isfinite(pts)) or pts.min() < 0.0 or pts.max() > 1.0:
            raise ArgumentError("Every coordinate of a sample must lie in [0, 1]")
        self.points = pts
        if self.latent_states is not None:
            states = np.asarray(self.latent_states, dtype=int)
            if states.shape != (pts.shape[0],):
                raise ArgumentError(
                    f"Expected {pts.shape[0]} latent states, got {states.shape}"
                )
            self.latent_states = states

    @property
    def N(self) -> int:
        return self.points.shape[0]

    @property
    def k(self) -> int:
        return self.points.shape[1]

    @property
    def xs(self) -> np.ndarray:
        return self.points[:, :-1]

    @property
    def labels(self) -> np.ndarray:
        return label_of(self.points[:, -1])

    def __len__(self) -> int:
        return self.N

    def prefix(self, m: int) -> "SampleSequence":
        """First m samples."""
        states = None if self.latent_states is None else self.latent_states[:m]
        return SampleSequence(self.points[:m], states)

    def tail(self, m: int) -> "SampleSequence":
        """Last m samples."""
        states = None if self.latent_states is None else self.latent_states[-m:]
        return SampleSequence(self.points[-m:], states)

    def history(self, d: int) -> np.ndarray:
        """The last d samples as a (d, k) array, oldest first."""
        if d < 1 or d > self.N:
            raise ArgumentError(f"History length {d} out of range for N = {self.N}")
        return self.points[-d:].copy()


@dataclass
class Hypothesis:
    """A linear predictor sign(w.x + bias) paired with a loss bounded in [0, 1]."""

    weights: np.ndarray
    bias: float = 0.0
    loss_kind: str = ZERO_ONE

    def __post_init__(self):
        self.weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        self.bias = float(self.bias)
        if self.loss_kind not in LOSS_KINDS:
            raise ArgumentError(f"Unknown loss kind '{self.loss_kind}', expected {LOSS_KINDS}")

    def score(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.weights + self.bias

    def predict(self, x) -> np.ndarray:
        return sign(self.score(x))

    def losses(self, samples) -> np.ndarray:
        """Loss of every sample row (x..., y01); values in [0, 1]."""
        rows = np.atleast_2d(np.asarray(samples, dtype=float))
        if rows.shape[1] != self.weights.size + 1:
            raise ArgumentError(
                f"Samples have {rows.shape[1]} coordinates, hypothesis expects "
                f"{self.weights.size + 1}"
            )
        y = label_of(rows[:, -1])
        s = self.score(rows[:, :-1])
        if self.loss_kind == ZERO_ONE:
            return (sign(s) != y).astype(float)
        return np.minimum(1.0, (s - y) ** 2 / 4.0)

    def to_dict(self) -> Dict:
        return {
            "weights": self.weights.tolist(),
            "bias": self.bias,
            "loss_kind": self.loss_kind,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "Hypothesis":
        return cls(
            weights=data["weights"],
            bias=data.get("bias", 0.0),
            loss_kind=data.get("loss_kind", ZERO_ONE),
        )


@dataclass
class WeightVector:
    """Kernel weights w_i of the index set I = {d, ..., N-1}."""

    index_set: np.ndarray
    raw_weights: np.ndarray
    normalization: float = 1.0

    @property
    def n(self) -> int:
        return int(self.raw_weights.size)

    def scaled(self, c: float) -> "WeightVector":
        return WeightVector(self.index_set, self.raw_weights * c, self.normalization)


def _sum(values: np.ndarray) -> float:
    if settings.SUMMATION == "exact":
        return math.fsum(values.tolist())
    return float(np.sum(values))


def _check_history_call(seq: SampleSequence, d: int) -> None:
    if int(d) != d or d < 1:
        raise ArgumentError(f"History length must be a positive integer, got {d}")
    if seq.N < d + 2:
        raise ArgumentError(f"Need N >= d + 2 samples, got N = {seq.N} for d = {d}")


def _target_array(seq: SampleSequence, d: int, target) -> np.ndarray:
    arr = np.asarray(target, dtype=float).reshape(-1)
    if arr.size != seq.k * d:
        raise ArgumentError(
            f"Target history has {arr.size} coordinates, expected k*d = {seq.k * d}"
        )
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ArgumentError("Target history coordinates must lie in [0, 1]")
    return arr


def history_windows(seq: SampleSequence, d: int) -> np.ndarray:
    """
    Flattened histories z_{i-d+1}^i for i in I, shape (N - d, k*d), oldest first.
    """
    windows = np.lib.stride_tricks.sliding_window_view(seq.points, d, axis=0)
    windows = np.transpose(windows, (0, 2, 1)).reshape(windows.shape[0], d * seq.k)
    return windows[: seq.N - d]


def history_weights(
    seq: SampleSequence, d: int, spec: WeightScheme, target
) -> WeightVector:
    """
    Kernel weight of every history against the target history.

    Args:
        seq: the observed sequence
        d: history length
        spec: smoothing kernel of dimension k*d, or a stratified set spec
        target: target history z_bar, shape (d, k) or flat k*d (oldest first)

    Returns:
        WeightVector: w_i = K((z_bar - z_{i-d+1}^i) / b) for i in I

    Raises:
        ArgumentError: N < d + 2, or dimension mismatch
    """
    _check_history_call(seq, d)
    z_bar = _target_array(seq, d, target)
    index_set = np.arange(d, seq.N)

    if isinstance(spec, StratifiedSetSpec):
        history = LabeledHistory.from_samples(z_bar.reshape(d, seq.k))
        raw = stratified_window_weights(
            seq.xs, seq.labels, d, history, spec.base_width
        )[: seq.N - d]
        return WeightVector(index_set, raw, 1.0)

    if spec.dim != seq.k * d:
        raise ArgumentError(
            f"Kernel dimension {spec.dim} does not match k*d = {seq.k * d}"
        )
    windows = history_windows(seq, d)
    raw = eval_kernel(spec, (z_bar[None, :] - windows) / spec.bandwidth_b)
    return WeightVector(index_set, np.atleast_1d(raw), spec.bandwidth_b**d)


def estimate_p(seq: SampleSequence, d: int, spec: WeightScheme, target) -> float:
    """p-hat = 1/(n b^d) sum_i w_i (no b^d factor on the stratified path)."""
    weights = history_weights(seq, d, spec, target)
    return _sum(weights.raw_weights) / (weights.n * weights.normalization)


def estimate_q(
    seq: SampleSequence, d: int, spec: WeightScheme, target, h: Hypothesis
) -> float:
    """q-hat = 1/(n b^d) sum_i loss(h, z_{i+1}) w_i."""
    weights = history_weights(seq, d, spec, target)
    losses = h.losses(seq.points[d:])
    return _sum(losses * weights.raw_weights) / (weights.n * weights.normalization)


def risk_from_weights(weights, losses) -> float:
    """
    Weighted mean loss sum(l_i w_i) / sum(w_i).

    Raises:
        NoEffectiveSamplesError: when the weights sum to zero
    """
    raw = weights.raw_weights if isinstance(weights, WeightVector) else np.asarray(weights)
    total = _sum(raw)
    if not total > 0.0:
        raise NoEffectiveSamplesError(
            "No effective samples: every kernel weight is zero for this target"
        )
    return float(np.clip(_sum(np.asarray(losses) * raw) / total, 0.0, 1.0))


def conditional_risk_estimate(
    seq: SampleSequence, d: int, spec: WeightScheme, target, h: Hypothesis
) -> float:
    """
    R-hat(h, z_bar) = q-hat / p-hat, a value in [0, 1].

    Raises:
        NoEffectiveSamplesError: p-hat = 0
        ArgumentError: as history_weights
    """
    weights = history_weights(seq, d, spec, target)
    return risk_from_weights(weights, h.losses(seq.points[d:]))


def empirical_marginal_risk(seq: SampleSequence, h: Hypothesis) -> float:
    """(1/N) sum_{i=1}^N loss(h, z_i)."""
    if seq is None or seq.N == 0:
        raise ArgumentError("Empirical risk of an empty sequence")
    return _sum(h.losses(seq.points)) / seq.N


def uniform_deviation(
    seq: SampleSequence,
    d: int,
    spec: WeightScheme,
    targets: Iterable,
    hypotheses: Sequence[Hypothesis],
    oracle: Callable[[np.ndarray, Hypothesis], float],
) -> float:
    """
    sup over targets and hypotheses of |R-hat(h, z_bar) - R(h, z_bar)|.

    Targets where the estimator has no effective samples are skipped and
    logged.
    """
    worst = 0.0
    for target in targets:
        weights = history_weights(seq, d, spec, target)
        if not _sum(weights.raw_weights) > 0.0:
            logger.debug(f"Skipping target without effective samples: {target}")
            continue
        for h in hypotheses:
            estimate = risk_from_weights(weights, h.losses(seq.points[d:]))
            worst = max(worst, abs(estimate - oracle(np.asarray(target), h)))
    return worst


def excess_risk_bound(
    true_risks: Sequence[float], estimated_risks: Sequence[float]
) -> Tuple[float, float]:
    """
    Excess risk of the estimator minimizer over a finite hypothesis set and
    its bound 2 * sup |R - R-hat|.

    Returns:
        tuple: (R(h_S) - min_h R(h), 2 * max_h |R(h) - R-hat(h)|)
    """
    true = np.asarray(true_risks, dtype=float)
    est = np.asarray(estimated_risks, dtype=float)
    if true.shape != est.shape or true.size == 0:
        raise ArgumentError("Risk lists must be non-empty and of equal length")
    chosen = int(np.argmin(est))
    return float(true[chosen] - true.min()), float(2.0 * np.max(np.abs(true - est)))
