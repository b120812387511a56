"""
Learners

Linear predictors fitted with squared loss as a convex surrogate for the 0/1
loss:

- ECRM: weighted least squares, the weight of sample z_{i+1} being the kernel
  similarity between its history and the target history,
- ERM: unweighted least squares over every sample,
- sliding window: unweighted least squares over the last d samples.

Training uses the raw residual; clipping only happens when a hypothesis is
scored through loss().
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .. import settings
from ..core.base import ArgumentError, DegenerateDesignError, NoEffectiveSamplesError
from .estimator import (
    ZERO_ONE,
    Hypothesis,
    SampleSequence,
    empirical_marginal_risk,
    history_weights,
)
from .kernels import WeightScheme

logger = logging.getLogger(__name__)

FALLBACK_ERROR = "error"
FALLBACK_UNIFORM = "uniform-weights"
ECRM = "ecrm"
ERM = "erm"
SLIDING_WINDOW = "sliding-window"
LEARNERS = (ECRM, ERM, SLIDING_WINDOW)

# reciprocal condition number below which an unregularized system is singular
RCOND_LIMIT = 1e-13


@dataclass
class TrainConfig:
    """History length, weight scheme, ridge and the zero-mass fallback."""

    d: int
    kernel: WeightScheme
    ridge: float = settings.DEFAULT_RIDGE
    fallback: str = settings.DEFAULT_FALLBACK
    loss_kind: str = ZERO_ONE

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ArgumentError(f"History length must be >= 1, got {self.d}")
        if self.ridge < 0:
            raise ArgumentError(f"Ridge must be non-negative, got {self.ridge}")
        if self.fallback not in (FALLBACK_ERROR, FALLBACK_UNIFORM):
            raise ArgumentError(f"Unknown fallback '{self.fallback}'")


def loss(h: Hypothesis, z) -> float:
    """
    Loss of h on one sample z = (x..., y01), in [0, 1].

    zero-one: 1[sign(w.x + bias) != y], sign(0) = +1
    clipped-squared: min(1, (w.x + bias - y)^2 / 4)
    """
    return float(h.losses(np.asarray(z, dtype=float).reshape(1, -1))[0])


def design_matrix(x: np.ndarray) -> np.ndarray:
    """Inputs with a trailing column of ones for the bias."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return np.column_stack([x, np.ones(x.shape[0])])


def weighted_objective(
    x: np.ndarray, y: np.ndarray, weights: np.ndarray, h: Hypothesis, ridge: float
) -> float:
    """sum_i w_i (w.x_i + bias - y_i)^2 + ridge |w|^2."""
    residual = h.score(x) - y
    return float(np.sum(weights * residual**2) + ridge * np.sum(h.weights**2))


def weighted_least_squares(
    x: np.ndarray,
    y: np.ndarray,
    weights: Optional[np.ndarray] = None,
    ridge: float = settings.DEFAULT_RIDGE,
    loss_kind: str = ZERO_ONE,
) -> Hypothesis:
    """
    Minimize sum_i w_i (w.x_i + bias - y_i)^2 + ridge |w|^2 by the normal equations.

    Weights are rescaled to mean one first, so the solution does not depend on
    their overall scale. The bias is not regularized.

    Args:
        x: inputs, shape (n, p)
        y: targets in {-1, +1}, shape (n,)
        weights: non-negative sample weights (default all ones)
        ridge: regularizer on the weight vector
        loss_kind: loss attached to the returned hypothesis

    Returns:
        Hypothesis: the minimizer

    Raises:
        NoEffectiveSamplesError: weights sum to zero
        DegenerateDesignError: singular normal matrix
    """
    design = design_matrix(x)
    y = np.asarray(y, dtype=float).reshape(-1)
    n, p = design.shape
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float).reshape(-1)
    if w.shape != (n,) or y.shape != (n,):
        raise ArgumentError(f"Shapes disagree: x {design.shape}, y {y.shape}, weights {w.shape}")
    if np.any(w < 0):
        raise ArgumentError("Sample weights must be non-negative")
    mass = w.sum()
    if not mass > 0:
        raise NoEffectiveSamplesError("No effective samples: total weight mass is zero")
    w = w / (mass / n)

    weighted = design * w[:, None]
    normal = design.T @ weighted
    penalty = np.full(p, ridge)
    penalty[-1] = 0.0
    normal = normal + np.diag(penalty)
    rhs = weighted.T @ y

    if not np.all(np.isfinite(normal)):
        raise DegenerateDesignError("Degenerate design: non-finite normal matrix")
    rcond = 1.0 / np.linalg.cond(normal)
    # only an unregularized system can be singular
    if ridge == 0 and not rcond > RCOND_LIMIT:
        raise DegenerateDesignError(
            f"Degenerate design: normal matrix is singular (rcond={rcond:.3g}, ridge={ridge})"
        )
    try:
        solution = scipy.linalg.solve(normal, rhs, assume_a="sym")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
        raise DegenerateDesignError(f"Degenerate design: {e}")
    return Hypothesis(weights=solution[:-1], bias=solution[-1], loss_kind=loss_kind)


def ecrm_fit(seq: SampleSequence, target, cfg: TrainConfig) -> Hypothesis:
    """
    Empirical conditional risk minimization through its squared-loss surrogate.

    The sample z_{i+1}, i in I, gets the kernel weight of its history against
    the target history.

    Args:
        seq: training sequence
        target: target history, shape (d, k) or flat
        cfg: training configuration

    Returns:
        Hypothesis: the weighted least squares solution

    Raises:
        NoEffectiveSamplesError: zero weight mass and fallback = "error"
        DegenerateDesignError: singular normal matrix
    """
    weights = history_weights(seq, cfg.d, cfg.kernel, target).raw_weights
    if not weights.sum() > 0:
        if cfg.fallback == FALLBACK_ERROR:
            raise NoEffectiveSamplesError(
                "No effective samples: every kernel weight is zero for this target"
            )
        logger.warning("Zero weight mass, falling back to uniform weights")
        weights = np.ones_like(weights)
    rows = seq.points[cfg.d :]
    return weighted_least_squares(
        rows[:, :-1], seq.labels[cfg.d :], weights, cfg.ridge, cfg.loss_kind
    )


def erm_fit(
    seq: SampleSequence, ridge: float = settings.DEFAULT_RIDGE, loss_kind: str = ZERO_ONE
) -> Hypothesis:
    """Unweighted least squares over every sample z_1..z_N."""
    if seq.N < 2:
        raise ArgumentError(f"ERM needs at least 2 samples, got {seq.N}")
    return weighted_least_squares(seq.xs, seq.labels, None, ridge, loss_kind)


def sliding_window_fit(
    seq: SampleSequence,
    d: int,
    ridge: float = settings.DEFAULT_RIDGE,
    loss_kind: str = ZERO_ONE,
) -> Hypothesis:
    """Unweighted least squares over the last d samples."""
    if d < 2 or d > seq.N:
        raise ArgumentError(
            f"Sliding window needs 2 <= d <= N samples, got d = {d}, N = {seq.N}"
        )
    window = seq.tail(d)
    return weighted_least_squares(window.xs, window.labels, None, ridge, loss_kind)


def fit(
    learner: str, seq: SampleSequence, cfg: TrainConfig, target=None
) -> Hypothesis:
    """
    Dispatch to one of the learners; ECRM defaults to the last d samples as target.
    """
    if learner == ECRM:
        return ecrm_fit(seq, seq.history(cfg.d) if target is None else target, cfg)
    if learner == ERM:
        return erm_fit(seq, cfg.ridge, cfg.loss_kind)
    if learner == SLIDING_WINDOW:
        return sliding_window_fit(seq, cfg.d, cfg.ridge, cfg.loss_kind)
    raise ArgumentError(f"Unknown learner '{learner}', expected one of {LEARNERS}")


def empirical_risk(seq: SampleSequence, h: Hypothesis) -> float:
    """Mean loss of h over every sample of seq."""
    return empirical_marginal_risk(seq, h)
