"""
Smoothing kernels

Smoothing kernels K: R^dim -> R+ (normalized, bounded by K1, zero mean,
second moments bounded by K2, Hölder continuous of order gamma with constant
L), their numerical axiom verification, and the stratified set similarity
used to compare labeled histories.

"kernel" here always means a density-estimation kernel, never a positive
definite kernel.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .. import settings
from ..core.base import ArgumentError, NumericError, UnsupportedDimensionError

logger = logging.getLogger(__name__)

SQEXP = "sqexp"
EPANECHNIKOV = "epanechnikov"
STRATIFIED_SET = "stratified-set"
SMOOTHING_FAMILIES = (SQEXP, EPANECHNIKOV)
FAMILIES = SMOOTHING_FAMILIES + (STRATIFIED_SET,)


def kernel_constants(
    family: str, dim: int, width: float = 1.0, scale: float = 1.0
) -> Tuple[float, float, float, float]:
    """
    Analytic constants (K1, K2, L, gamma) of a built-in family.

    sqexp:        K(u) = (2 pi w^2)^(-dim/2) exp(-|u|^2 / (2 w^2))
                  K1 = (2 pi w^2)^(-dim/2), K2 = w^2, L = K1 e^(-1/2) / w, gamma = 1
    epanechnikov: K(u) = prod_i 3/(4w) (1 - (u_i/w)^2)_+
                  K1 = (3/(4w))^dim, K2 = w^2/5, L = 2 sqrt(dim) (3/4)^dim / w^(dim+1), gamma = 1

    Args:
        family: "sqexp" or "epanechnikov"
        dim: ambient dimension
        width: width parameter w
        scale: multiplies the kernel (1 for a normalized kernel)

    Returns:
        tuple: (K1, K2, L, gamma)
    """
    if family == SQEXP:
        k1 = (2.0 * math.pi * width**2) ** (-dim / 2.0)
        k2 = width**2
        lip = k1 * math.exp(-0.5) / width
    elif family == EPANECHNIKOV:
        k1 = (3.0 / (4.0 * width)) ** dim
        k2 = width**2 / 5.0
        lip = 2.0 * math.sqrt(dim) * 0.75**dim / width ** (dim + 1)
    else:
        raise ArgumentError(f"Unknown smoothing kernel family: {family}")
    return scale * k1, scale * k2, scale * lip, 1.0


@dataclass
class KernelSpec:
    """
    A smoothing kernel with its constants and bandwidth.

    The constants are computed analytically at construction.
    """

    dim: int
    bandwidth_b: float
    family: str = SQEXP
    width: float = 1.0
    scale: float = 1.0
    K1: float = field(init=False)
    K2: float = field(init=False)
    lipschitz_L: float = field(init=False)
    lipschitz_gamma: float = field(init=False)

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ArgumentError(f"Kernel dimension must be >= 1, got {self.dim}")
        if not self.bandwidth_b > 0:
            raise ArgumentError(f"Bandwidth must be positive, got {self.bandwidth_b}")
        if not self.width > 0:
            raise ArgumentError(f"Kernel width must be positive, got {self.width}")
        self.dim = int(self.dim)
        self.K1, self.K2, self.lipschitz_L, self.lipschitz_gamma = kernel_constants(
            self.family, self.dim, self.width, self.scale
        )

    def with_dim(self, dim: int) -> "KernelSpec":
        """Same family, width and bandwidth in another dimension."""
        return KernelSpec(
            dim=dim,
            bandwidth_b=self.bandwidth_b,
            family=self.family,
            width=self.width,
            scale=self.scale,
        )

    def to_dict(self) -> Dict:
        return {
            "family": self.family,
            "dim": self.dim,
            "bandwidth": self.bandwidth_b,
            "width": self.width,
            "K1": self.K1,
            "K2": self.K2,
            "L": self.lipschitz_L,
            "gamma": self.lipschitz_gamma,
        }


@dataclass(frozen=True)
class StratifiedSetSpec:
    """Similarity weights between labeled histories (not a smoothing kernel)."""

    base_width: float
    family: str = STRATIFIED_SET

    def __post_init__(self):
        if not self.base_width > 0:
            raise ArgumentError(f"Base width must be positive, got {self.base_width}")

    def to_dict(self) -> Dict:
        return {"family": self.family, "base_width": self.base_width}


WeightScheme = Union[KernelSpec, StratifiedSetSpec]


def make_weight_scheme(
    family: str, dim: int, bandwidth: float, width: float = 1.0
) -> WeightScheme:
    """
    Build a weight scheme from its CLI/config description.

    For "stratified-set" the bandwidth is the width of the squared
    exponential base kernel.
    """
    if family == STRATIFIED_SET:
        return StratifiedSetSpec(base_width=bandwidth)
    if family not in SMOOTHING_FAMILIES:
        raise ArgumentError(f"Unknown kernel family '{family}', expected one of {FAMILIES}")
    return KernelSpec(dim=dim, bandwidth_b=bandwidth, family=family, width=width)


def eval_kernel(spec: KernelSpec, u) -> Union[float, np.ndarray]:
    """
    Evaluate K(u).

    Args:
        spec: the kernel
        u: a vector of length spec.dim, or an array whose last axis is spec.dim

    Returns:
        float for a single vector, an array of values for a batch

    Raises:
        ArgumentError: if the last axis does not have length spec.dim
    """
    arr = np.asarray(u, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] != spec.dim:
        raise ArgumentError(
            f"Kernel argument has shape {arr.shape}, expected last axis {spec.dim}"
        )
    w = spec.width
    if spec.family == SQEXP:
        norm = (2.0 * math.pi * w**2) ** (-spec.dim / 2.0)
        values = norm * np.exp(-np.sum(arr * arr, axis=-1) / (2.0 * w**2))
    elif spec.family == EPANECHNIKOV:
        factors = np.clip(1.0 - (arr / w) ** 2, 0.0, None) * (3.0 / (4.0 * w))
        values = np.prod(factors, axis=-1)
    else:
        raise ArgumentError(f"Unknown smoothing kernel family: {spec.family}")
    values = spec.scale * values
    if arr.ndim == 1:
        return float(values)
    return values


@dataclass
class QuadratureConfig:
    """Tensor midpoint grid over [-radius, radius]^dim and the Hölder probe."""

    radius: float = settings.DEFAULT_AXIOM_RADIUS
    resolution: Optional[int] = None
    tolerance: float = settings.DEFAULT_AXIOM_TOLERANCE
    moment_tolerance: float = 1e-6
    holder_pairs: int = settings.DEFAULT_HOLDER_PAIRS
    seed: int = 0

    def resolution_for(self, dim: int) -> int:
        if self.resolution is not None:
            return int(self.resolution)
        # keeps the grid around 1e6-1e7 points
        return {1: 4096, 2: 512, 3: 128, 4: 48}[dim]


@dataclass
class AxiomCheck:
    name: str
    value: float
    reference: float
    passed: bool


@dataclass
class AxiomReport:
    """Numerical values of the smoothing kernel axioms and their verdicts."""

    family: str
    dim: int
    integral: float
    max_value: float
    first_moments: List[float]
    max_second_moment: float
    holder_ratio: float
    checks: List[AxiomCheck]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def check(self, name: str) -> AxiomCheck:
        for item in self.checks:
            if item.name == name:
                return item
        raise KeyError(name)

    def to_dict(self) -> Dict:
        return {
            "family": self.family,
            "dim": self.dim,
            "integral": self.integral,
            "max_value": self.max_value,
            "first_moments": self.first_moments,
            "max_second_moment": self.max_second_moment,
            "holder_ratio": self.holder_ratio,
            "passed": self.passed,
            "checks": [vars(c) for c in self.checks],
        }


def _midpoints(radius: float, resolution: int) -> Tuple[np.ndarray, float]:
    step = 2.0 * radius / resolution
    return -radius + step * (np.arange(resolution) + 0.5), step


def verify_kernel_axioms(
    spec: KernelSpec, quadrature: Optional[QuadratureConfig] = None
) -> AxiomReport:
    """
    Numerically verify the smoothing kernel axioms by grid quadrature.

    Computes the integral of K, its maximum on the grid, every first moment,
    the largest second moment and an empirical Hölder ratio
    max |K(u)-K(v)| / |u-v|^gamma over random pairs, and compares them with
    (1, K1, 0, K2, L).

    Args:
        spec: the kernel to verify
        quadrature: grid and tolerance settings

    Returns:
        AxiomReport: values and pass/fail flags

    Raises:
        UnsupportedDimensionError: dim > 4
        NumericError: the integrand is not finite
    """
    q = quadrature or QuadratureConfig()
    dim = spec.dim
    if dim > settings.MAX_QUADRATURE_DIM:
        raise UnsupportedDimensionError(
            f"Grid quadrature supports dim <= {settings.MAX_QUADRATURE_DIM}, got {dim}"
        )
    resolution = q.resolution_for(dim)
    mids, step = _midpoints(q.radius, resolution)
    cell = step**dim
    logger.info(
        f"Verifying {spec.family} kernel axioms in dim {dim} "
        f"(radius {q.radius}, {resolution} points per axis)"
    )

    if dim > 1:
        rest = np.stack(
            np.meshgrid(*([mids] * (dim - 1)), indexing="ij"), axis=-1
        ).reshape(-1, dim - 1)
    else:
        rest = np.empty((1, 0))
    block = max(1, (1 << 20) // rest.shape[0])

    total = 0.0
    peak = 0.0
    first = np.zeros(dim)
    second = np.zeros((dim, dim))
    for start in range(0, resolution, block):
        heads = mids[start : start + block]
        pts = np.concatenate(
            [np.repeat(heads, rest.shape[0])[:, None], np.tile(rest, (heads.size, 1))],
            axis=1,
        )
        values = eval_kernel(spec, pts)
        if not np.all(np.isfinite(values)):
            raise NumericError(f"Non-finite kernel values for family {spec.family}")
        total += values.sum()
        peak = max(peak, float(np.max(np.abs(values))))
        first += pts.T @ values
        second += np.einsum("ni,nj,n->ij", pts, pts, values)
    integral = total * cell
    first_moments = (first * cell).tolist()
    max_second = float(np.max(second * cell))

    holder = _holder_ratio(spec, q)

    tol = q.tolerance
    checks = [
        AxiomCheck("normalization", integral, 1.0, abs(integral - 1.0) <= tol),
        AxiomCheck("bounded", peak, spec.K1, peak <= spec.K1 * (1.0 + tol)),
        AxiomCheck(
            "first_moments",
            float(np.max(np.abs(first_moments))),
            0.0,
            bool(np.max(np.abs(first_moments)) <= q.moment_tolerance),
        ),
        AxiomCheck("second_moments", max_second, spec.K2, max_second <= spec.K2 + tol),
        AxiomCheck(
            "holder", holder, spec.lipschitz_L, holder <= spec.lipschitz_L * (1.0 + tol)
        ),
    ]
    report = AxiomReport(
        family=spec.family,
        dim=dim,
        integral=float(integral),
        max_value=peak,
        first_moments=first_moments,
        max_second_moment=max_second,
        holder_ratio=holder,
        checks=checks,
    )
    for check in checks:
        if not check.passed:
            logger.warning(
                f"Axiom {check.name} failed: value {check.value} vs reference {check.reference}"
            )
    return report


def _holder_ratio(spec: KernelSpec, q: QuadratureConfig) -> float:
    """Largest |K(u)-K(v)| / |u-v|^gamma over far and near random pairs."""
    rng = np.random.default_rng(q.seed)
    n = max(1, q.holder_pairs)
    reach = min(q.radius, 3.0 * spec.width)
    u = rng.uniform(-reach, reach, size=(n, spec.dim))
    far = rng.uniform(-reach, reach, size=(n // 2, spec.dim))
    near = u[n // 2 :] + rng.normal(scale=1e-3 * spec.width, size=(n - n // 2, spec.dim))
    v = np.concatenate([far, near], axis=0)
    dist = np.linalg.norm(u - v, axis=1)
    keep = dist > 0
    diff = np.abs(eval_kernel(spec, u[keep]) - eval_kernel(spec, v[keep]))
    ratios = diff / dist[keep] ** spec.lipschitz_gamma
    return float(np.max(ratios)) if ratios.size else 0.0


@dataclass
class LabeledHistory:
    """d labeled points (x, y) with y in {-1, +1}."""

    points: List[Tuple[np.ndarray, int]]

    def __post_init__(self):
        cleaned = []
        for x, y in self.points:
            if y not in (-1, 1):
                raise ArgumentError(f"Labels must be -1 or +1, got {y}")
            cleaned.append((np.asarray(x, dtype=float), int(y)))
        self.points = cleaned

    def __len__(self) -> int:
        return len(self.points)

    @property
    def xs(self) -> np.ndarray:
        return np.array([x for x, _ in self.points])

    @property
    def ys(self) -> np.ndarray:
        return np.array([y for _, y in self.points])

    @classmethod
    def from_samples(cls, samples: np.ndarray) -> "LabeledHistory":
        """Build from sample rows (x..., y01), y01 >= 0.5 meaning +1."""
        rows = np.atleast_2d(np.asarray(samples, dtype=float))
        return cls([(row[:-1], 1 if row[-1] >= 0.5 else -1) for row in rows])


def base_kernel(x: np.ndarray, x_bar: np.ndarray, base_width: float) -> np.ndarray:
    """Unnormalized squared exponential exp(-|x - x_bar|^2 / w^2), values in [0, 1]."""
    diff = np.asarray(x, dtype=float) - np.asarray(x_bar, dtype=float)
    return np.exp(-np.sum(diff * diff, axis=-1) / base_width**2)


def stratified_set_weight(
    S: LabeledHistory, S_bar: LabeledHistory, base_width: float
) -> float:
    """
    Stratified set similarity of two labeled histories.

    Averages the base kernel over positive/positive and negative/negative
    pairs, each stratum contributing half. A stratum that is empty in either
    history contributes 0.

    Args:
        S: first history
        S_bar: second history
        base_width: width w of the base kernel

    Returns:
        float: weight in [0, 1], symmetric in (S, S_bar)
    """
    if len(S) != len(S_bar):
        raise ArgumentError(f"History lengths differ: {len(S)} vs {len(S_bar)}")
    if not base_width > 0:
        raise ArgumentError(f"Base width must be positive, got {base_width}")
    total = 0.0
    for label in (1, -1):
        a = S.xs[S.ys == label]
        b = S_bar.xs[S_bar.ys == label]
        if len(a) == 0 or len(b) == 0:
            continue
        pair = base_kernel(a[:, None, :], b[None, :, :], base_width)
        total += pair.sum() / (2.0 * len(a) * len(b))
    return float(total)


def stratified_window_weights(
    xs: np.ndarray,
    labels: np.ndarray,
    d: int,
    target: LabeledHistory,
    base_width: float,
) -> np.ndarray:
    """
    Stratified set weights of every length-d window of a labeled sequence
    against one target history.

    Window j covers rows j..j+d-1; all windows are returned (len(xs)-d+1).
    Equal to stratified_set_weight on each window.
    """
    txs, tys = target.xs, target.ys
    n_windows = len(xs) - d + 1
    weights = np.zeros(n_windows)
    for label in (1, -1):
        t = txs[tys == label]
        if len(t) == 0:
            continue
        member = (labels == label).astype(float)
        scores = base_kernel(xs[:, None, :], t[None, :, :], base_width).sum(axis=1) * member
        sums = np.lib.stride_tricks.sliding_window_view(scores, d).sum(axis=1)
        counts = np.lib.stride_tricks.sliding_window_view(member, d).sum(axis=1)
        populated = counts > 0
        weights[populated] += sums[populated] / (2.0 * counts[populated] * len(t))
    return weights
