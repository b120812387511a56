"""
Hidden Markov simulator and exact oracles

A time-homogeneous hidden Markov process with m latent states. In state i
the input x is uniform on an axis-aligned box and the label is
y = sign(a_i . x + c_i), sign(0) = +1. Samples are rescaled to [0, 1]^2 and
the label is stored as (y + 1) / 2, so a sample is (x1, x2, y01) in [0, 1]^3.

Besides the simulator this module computes exact next-state posteriors
(forward recursion), conditional risks of linear predictors, and a
beta-mixing upper bound for the latent chain.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg

from .. import settings
from ..core.base import (
    ArgumentError,
    InconsistentObservationError,
    NotMixingError,
)
from ..core.utils import is_probability_vector
from .estimator import ZERO_ONE, Hypothesis, SampleSequence, label_of, sign

logger = logging.getLogger(__name__)

QUADRATURE = "quadrature"
POLYGON = "polygon"
EIGEN_ZERO = 1e-12
UNIT_MODULUS = 1e-10


@dataclass
class HiddenMarkovSpec:
    """Transition matrix, per-state affine labeling functions and emission box."""

    transition: np.ndarray
    label_directions: np.ndarray
    label_offsets: np.ndarray
    emission_box: np.ndarray
    initial_distribution: np.ndarray

    def __post_init__(self):
        self.transition = np.atleast_2d(np.asarray(self.transition, dtype=float))
        m = self.transition.shape[0]
        if self.transition.shape != (m, m) or m < 1:
            raise ArgumentError(f"Transition matrix must be square, got {self.transition.shape}")
        if np.any(self.transition < 0) or np.any(
            np.abs(self.transition.sum(axis=1) - 1.0) > 1e-12
        ):
            raise ArgumentError("Transition rows must be non-negative and sum to 1")
        self.label_directions = np.asarray(self.label_directions, dtype=float).reshape(m, 2)
        self.label_offsets = np.asarray(self.label_offsets, dtype=float).reshape(m)
        self.emission_box = np.asarray(self.emission_box, dtype=float).reshape(2, 2)
        if np.any(self.emission_box[:, 1] <= self.emission_box[:, 0]):
            raise ArgumentError(f"Degenerate emission box {self.emission_box.tolist()}")
        self.initial_distribution = np.asarray(self.initial_distribution, dtype=float).reshape(m)
        if not is_probability_vector(self.initial_distribution):
            raise ArgumentError("Initial distribution must be a probability vector")

    @property
    def num_states(self) -> int:
        return self.transition.shape[0]

    @property
    def affine_labels(self) -> List[Tuple[np.ndarray, float]]:
        """Per-state (a, c) with f_i(x) = a . x + c in box coordinates."""
        return [(a, float(c)) for a, c in zip(self.label_directions, self.label_offsets)]

    @property
    def box_low(self) -> np.ndarray:
        return self.emission_box[:, 0]

    @property
    def box_size(self) -> np.ndarray:
        return self.emission_box[:, 1] - self.emission_box[:, 0]

    def to_box(self, x01) -> np.ndarray:
        """Rescaled inputs back to emission box coordinates."""
        return self.box_low + np.asarray(x01, dtype=float) * self.box_size

    def to_unit(self, x) -> np.ndarray:
        """Emission box coordinates to [0, 1]^2."""
        return (np.asarray(x, dtype=float) - self.box_low) / self.box_size

    def state_labels(self, x01) -> np.ndarray:
        """sign f_i(x) for every state, shape (..., m)."""
        x = self.to_box(x01)
        return sign(x @ self.label_directions.T + self.label_offsets)

    def to_dict(self) -> Dict:
        return {
            "transition": self.transition.tolist(),
            "affine_labels": [
                {"a": a.tolist(), "c": float(c)}
                for a, c in zip(self.label_directions, self.label_offsets)
            ],
            "emission_box": self.emission_box.tolist(),
            "initial_distribution": self.initial_distribution.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "HiddenMarkovSpec":
        transition = np.asarray(data["transition"], dtype=float)
        m = transition.shape[0]
        labels = data["affine_labels"]
        initial = data.get("initial_distribution")
        return cls(
            transition=transition,
            label_directions=[item["a"] for item in labels],
            label_offsets=[item["c"] for item in labels],
            emission_box=data.get("emission_box", settings.EMISSION_BOX),
            initial_distribution=initial if initial is not None else np.full(m, 1.0 / m),
        )


@dataclass
class StatePosterior:
    """Probability vector over latent states at a given time."""

    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float).reshape(-1)
        if np.any(self.probs < -1e-15) or abs(self.probs.sum() - 1.0) > 1e-10:
            raise ArgumentError(f"Not a probability vector: {self.probs.tolist()}")

    @classmethod
    def indicator(cls, m: int, state: int) -> "StatePosterior":
        probs = np.zeros(m)
        probs[state] = 1.0
        return cls(probs)


def simulate(spec: HiddenMarkovSpec, N: int, seed: int) -> SampleSequence:
    """
    Draw N samples of the process.

    Args:
        spec: the process
        N: number of samples
        seed: RNG seed, equal seeds give identical sequences

    Returns:
        SampleSequence: rescaled samples (x1, x2, y01) with latent states
    """
    if int(N) != N or N < 1:
        raise ArgumentError(f"Sequence length must be >= 1, got {N}")
    rng = np.random.default_rng(seed)
    m = spec.num_states
    cumulative = np.cumsum(spec.transition, axis=1)
    uniforms = rng.random(N)

    states = np.empty(N, dtype=int)
    state = min(int(np.searchsorted(np.cumsum(spec.initial_distribution), uniforms[0], side="right")), m - 1)
    states[0] = state
    for t in range(1, N):
        state = min(int(np.searchsorted(cumulative[state], uniforms[t], side="right")), m - 1)
        states[t] = state

    x01 = rng.random((N, 2))
    x = spec.to_box(x01)
    y = sign(np.einsum("ij,ij->i", x, spec.label_directions[states]) + spec.label_offsets[states])
    points = np.column_stack([x01, (y + 1) / 2.0])
    logger.debug(f"Simulated {N} samples with seed {seed}")
    return SampleSequence(points, states)


def emission_likelihoods(spec: HiddenMarkovSpec, samples: np.ndarray) -> np.ndarray:
    """
    Likelihood of each sample under each state, shape (T, m).

    Uniform density on the box times 1[sign f_i(x) = y].
    """
    rows = np.atleast_2d(np.asarray(samples, dtype=float))
    density = 1.0 / float(np.prod(spec.box_size))
    consistent = spec.state_labels(rows[:, :2]) == label_of(rows[:, 2])[:, None]
    return density * consistent.astype(float)


def forward_posterior(
    spec: HiddenMarkovSpec,
    observed,
    prior: Optional[np.ndarray] = None,
) -> StatePosterior:
    """
    Posterior of the latent state following the observed prefix.

    Forward recursion with per-step normalization; prior is the distribution
    of the first observed step's state (default: spec.initial_distribution).

    Args:
        spec: the process
        observed: SampleSequence or (T, 3) array of rescaled samples
        prior: optional distribution of the first state

    Returns:
        StatePosterior: P(s_{T+1} | z_1..z_T)

    Raises:
        InconsistentObservationError: an observation no state can emit
    """
    rows = observed.points if isinstance(observed, SampleSequence) else np.asarray(observed, dtype=float)
    rows = rows.reshape(-1, 3) if rows.size else np.empty((0, 3))
    predicted = np.asarray(spec.initial_distribution if prior is None else prior, dtype=float)
    for t, likelihood in enumerate(emission_likelihoods(spec, rows) if len(rows) else []):
        alpha = predicted * likelihood
        total = alpha.sum()
        if not total > 0.0:
            raise InconsistentObservationError(
                f"Observation {t} has zero likelihood under every latent state"
            )
        predicted = (alpha / total) @ spec.transition
    return StatePosterior(predicted / predicted.sum())


def history_posterior(spec: HiddenMarkovSpec, history) -> StatePosterior:
    """Next-state posterior given only the history, started from stationarity."""
    return forward_posterior(spec, history, prior=stationary_distribution(spec))


def stationary_distribution(spec: HiddenMarkovSpec) -> np.ndarray:
    """
    Left fixed point pi P = pi with sum(pi) = 1 (least squares solution).
    """
    m = spec.num_states
    system = np.vstack([spec.transition.T - np.eye(m), np.ones((1, m))])
    rhs = np.concatenate([np.zeros(m), [1.0]])
    pi, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def _clip_polygon(polygon: List[np.ndarray], g: np.ndarray, g0: float) -> List[np.ndarray]:
    """Sutherland-Hodgman clipping by the half-plane g.x + g0 >= 0."""
    out = []
    for i, current in enumerate(polygon):
        previous = polygon[i - 1]
        cur_in = g @ current + g0 >= 0.0
        prev_in = g @ previous + g0 >= 0.0
        if cur_in != prev_in:
            denom = g @ (current - previous)
            frac = -(g @ previous + g0) / denom
            out.append(previous + frac * (current - previous))
        if cur_in:
            out.append(current)
    return out


def _polygon_area(polygon: List[np.ndarray]) -> float:
    if len(polygon) < 3:
        return 0.0
    pts = np.array(polygon)
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def _half_plane(
    polygon: List[np.ndarray], g: np.ndarray, g0: float, positive: bool
) -> List[np.ndarray]:
    """Part of the polygon where sign(g.x + g0) is +1 (positive) or -1."""
    if not polygon:
        return []
    if not np.any(g):
        # constant score, sign(0) = +1
        return polygon if (g0 >= 0.0) == positive else []
    return _clip_polygon(polygon, g, g0) if positive else _clip_polygon(polygon, -g, -g0)


def _disagreement_area(
    h: Hypothesis, state_dir: np.ndarray, state_off: float
) -> float:
    """Area of the unit square where sign(h) and sign(f) disagree."""
    square = [np.array(p, dtype=float) for p in ((0, 0), (1, 0), (1, 1), (0, 1))]
    area = 0.0
    for h_positive in (True, False):
        region = _half_plane(square, h.weights, h.bias, h_positive)
        region = _half_plane(region, state_dir, state_off, not h_positive)
        area += _polygon_area(region)
    return area


def per_state_risks(
    spec: HiddenMarkovSpec,
    h: Hypothesis,
    resolution: int = settings.DEFAULT_QUADRATURE_RESOLUTION,
    method: str = settings.DEFAULT_ORACLE_METHOD,
) -> np.ndarray:
    """
    E_{x ~ Unif(box)}[loss(h, (x, sign f_i(x)))] for every state i.

    Args:
        spec: the process
        h: linear hypothesis on rescaled inputs
        resolution: midpoint grid points per axis (quadrature method)
        method: "quadrature", or "polygon" (exact, zero-one loss only)

    Returns:
        np.ndarray: one risk per state
    """
    if h.weights.size != 2:
        raise ArgumentError(f"Hypothesis must act on 2 inputs, got {h.weights.size}")
    if method == POLYGON:
        if h.loss_kind != ZERO_ONE:
            raise ArgumentError("The polygon oracle only supports the zero-one loss")
        # f_i in rescaled coordinates: (a * size) . x01 + (a . low + c)
        dirs = spec.label_directions * spec.box_size
        offs = spec.label_directions @ spec.box_low + spec.label_offsets
        return np.array([_disagreement_area(h, g, g0) for g, g0 in zip(dirs, offs)])
    if method != QUADRATURE:
        raise ArgumentError(f"Unknown oracle method '{method}'")

    axis = (np.arange(resolution) + 0.5) / resolution
    grid = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1).reshape(-1, 2)
    scores = h.score(grid)
    labels = spec.state_labels(grid)
    if h.loss_kind == ZERO_ONE:
        losses = (sign(scores)[:, None] != labels).astype(float)
    else:
        losses = np.minimum(1.0, (scores[:, None] - labels) ** 2 / 4.0)
    return losses.mean(axis=0)


def conditional_risk_oracle(
    spec: HiddenMarkovSpec,
    posterior: StatePosterior,
    h: Hypothesis,
    resolution: int = settings.DEFAULT_QUADRATURE_RESOLUTION,
    method: str = settings.DEFAULT_ORACLE_METHOD,
) -> float:
    """
    Exact conditional risk sum_i posterior(i) * E_x[loss(h, (x, sign f_i(x)))].
    """
    risks = per_state_risks(spec, h, resolution, method)
    return float(np.clip(posterior.probs @ risks, 0.0, 1.0))


def positive_label_probability(
    spec: HiddenMarkovSpec, posterior: StatePosterior, grid: np.ndarray
) -> np.ndarray:
    """P(y = +1 | x) under the posterior mixture, at each grid point."""
    return (spec.state_labels(grid) > 0).astype(float) @ posterior.probs


def label_expectation_grid(
    spec: HiddenMarkovSpec, posterior: StatePosterior, resolution: int
) -> Tuple[np.ndarray, np.ndarray]:
    """
    E[y | x] = sum_i posterior(i) sign f_i(x) on a midpoint grid.

    Returns:
        tuple: (grid points (resolution^2, 2) in rescaled coordinates, values)
    """
    axis = (np.arange(resolution) + 0.5) / resolution
    grid = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1).reshape(-1, 2)
    return grid, spec.state_labels(grid).astype(float) @ posterior.probs


def bayes_risk(
    spec: HiddenMarkovSpec,
    posterior: StatePosterior,
    resolution: int = settings.DEFAULT_QUADRATURE_RESOLUTION,
) -> float:
    """Lowest achievable 0/1 risk under the posterior: E_x[min(p(x), 1 - p(x))]."""
    axis = (np.arange(resolution) + 0.5) / resolution
    grid = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1).reshape(-1, 2)
    p = positive_label_probability(spec, posterior, grid)
    return float(np.minimum(p, 1.0 - p).mean())


def random_chain(seed: int) -> HiddenMarkovSpec:
    """
    A random 4-state process.

    Rows are Dirichlet(1) draws plus a self-loop mass of 0.2, renormalized.
    Each state gets a uniformly oriented labeling line through a point of the
    central 60% of the box. The chain starts from its stationary distribution.
    """
    rng = np.random.default_rng(seed)
    m = settings.NUM_STATES
    transition = rng.dirichlet(np.ones(m), size=m) + settings.MIN_SELF_LOOP * np.eye(m)
    transition = transition / transition.sum(axis=1, keepdims=True)

    box = np.asarray(settings.EMISSION_BOX, dtype=float)
    angles = rng.uniform(0.0, 2.0 * np.pi, size=m)
    directions = np.column_stack([np.cos(angles), np.sin(angles)])
    anchors = box[:, 0] + rng.uniform(0.2, 0.8, size=(m, 2)) * (box[:, 1] - box[:, 0])
    offsets = -np.einsum("ij,ij->i", directions, anchors)

    spec = HiddenMarkovSpec(
        transition=transition,
        label_directions=directions,
        label_offsets=offsets,
        emission_box=box,
        initial_distribution=np.full(m, 1.0 / m),
    )
    spec.initial_distribution = stationary_distribution(spec)
    return spec


def eigenvalue_moduli(transition: np.ndarray) -> np.ndarray:
    """Eigenvalue moduli in decreasing order."""
    return np.sort(np.abs(np.linalg.eigvals(transition)))[::-1]


def second_largest_modulus(spec: HiddenMarkovSpec) -> float:
    moduli = eigenvalue_moduli(spec.transition)
    return float(moduli[1]) if moduli.size > 1 else 0.0


def _check_mixing(spec: HiddenMarkovSpec) -> None:
    moduli = eigenvalue_moduli(spec.transition)
    if np.sum(moduli >= 1.0 - UNIT_MODULUS) != 1:
        raise NotMixingError(
            "Latent chain is not mixing (reducible or periodic): "
            f"eigenvalue moduli {np.round(moduli, 12).tolist()}"
        )


def beta_mixing_exact(spec: HiddenMarkovSpec, j: int) -> float:
    """
    beta(j) = sum_s pi(s) TV(P^j(s, .), pi) for the stationary latent chain.
    """
    if j < 0:
        raise ArgumentError(f"Gap must be non-negative, got {j}")
    pi = stationary_distribution(spec)
    power = np.linalg.matrix_power(spec.transition, int(j))
    tv = 0.5 * np.abs(power - pi[None, :]).sum(axis=1)
    return float(np.clip(pi @ tv, 0.0, 1.0))


def beta_mixing_bound(spec: HiddenMarkovSpec, j: int) -> float:
    """
    Upper bound C * lambda^j on the j-th beta-mixing coefficient of the latent
    chain, which dominates the coefficient of the observed process.

    lambda is the second largest eigenvalue modulus; with the eigen
    decomposition P = V diag(l) V^-1,
    C = 1/2 sum_{k != 1} max_s |V[s, k]| * sum_s' |V^-1[k, s']|.

    Raises:
        NotMixingError: reducible or periodic chain
    """
    if j < 0:
        raise ArgumentError(f"Gap must be non-negative, got {j}")
    _check_mixing(spec)
    eigvals, right = scipy.linalg.eig(spec.transition)
    if np.linalg.cond(right) > 1e12:
        logger.warning("Transition matrix is close to defective, using the exact coefficient")
        return beta_mixing_exact(spec, j)
    left = np.linalg.inv(right)
    unit = int(np.argmin(np.abs(eigvals - 1.0)))
    others = [k for k in range(eigvals.size) if k != unit]
    if not others:
        return 0.0
    constant = 0.5 * sum(
        np.max(np.abs(right[:, k])) * np.sum(np.abs(left[k, :])) for k in others
    )
    lam = max(float(np.abs(eigvals[k])) for k in others)
    if lam < EIGEN_ZERO:
        lam = 0.0
    return float(min(1.0, constant * lam ** int(j)))
