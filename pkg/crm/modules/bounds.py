"""
Finite-sample concentration bound for the conditional risk estimator

For thresholds

    t1 = (t D0 - K2 D2 d^2 b^2) / 6
    t2 = t1 b^d / (64 K1 L_H)
    t3 = (3 L / (b^(d+gamma) t1))^(1/gamma)

and block counts with 4 mu a d <= N,

    P(sup |R-hat - R| > t) <= 32 (sqrt(kd) t3 / 2)^kd N1(t2, H, n) exp(-mu t1^2 b^(2d) / (2048 K1^2))
                            + 4 (sqrt(kd) t3 / 2)^kd (mu - 1) beta(2 a d)

with n = N - d. Everything is evaluated in log space; the bound is allowed
to be +inf. Mixing coefficients and covering numbers are injected as
functions.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from ..core.base import ArgumentError, ConfigError, NumericError, VacuousRegimeError

logger = logging.getLogger(__name__)

MAX_LOG = 709.0
DIVISOR_SEARCH = 1_000_000


def _safe_exp(value: float) -> float:
    if value > MAX_LOG:
        return math.inf
    return math.exp(value)


def _log(value: float) -> float:
    if value <= 0.0:
        return -math.inf
    return math.log(value)


@dataclass
class BoundParams:
    """Every symbol of the concentration bound."""

    t: float
    N: int
    k: int
    d: int
    b: float
    K1: float
    K2: float
    L: float
    gamma: float
    D0: float
    D2: float
    L_H: float
    beta: Callable[[int], float]
    covering: Callable[[float, int], float]
    mu: float = 1
    a: float = 1
    D1: Optional[float] = None
    L_R: Optional[float] = None

    def __post_init__(self):
        if not 0.0 < self.t <= 1.0:
            raise ArgumentError(f"Deviation level t must lie in (0, 1], got {self.t}")
        for name in ("N", "k", "d", "b", "K1", "K2", "L", "D0", "D2", "L_H", "mu", "a"):
            if not getattr(self, name) > 0:
                raise ArgumentError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0.0 < self.gamma <= 1.0:
            raise ArgumentError(f"gamma must lie in (0, 1], got {self.gamma}")
        if 4 * self.mu * self.a * self.d > self.N:
            raise ArgumentError(
                f"Block schedule needs 4*mu*a*d <= N, got 4*{self.mu}*{self.a}*{self.d} > {self.N}"
            )

    @property
    def n(self) -> int:
        return self.N - self.d

    @property
    def kd(self) -> int:
        return self.k * self.d


def derived_thresholds(p: BoundParams) -> Tuple[float, float, float]:
    """
    (t1, t2, t3) of the bound.

    Raises:
        VacuousRegimeError: t D0 <= K2 D2 d^2 b^2 (t1 <= 0)
    """
    margin = p.t * p.D0 - p.K2 * p.D2 * p.d**2 * p.b**2
    if not margin > 0:
        raise VacuousRegimeError(
            f"Vacuous regime: t*D0 - K2*D2*d^2*b^2 = {margin:.6g} <= 0", margin=margin
        )
    t1 = margin / 6.0
    t2 = t1 * p.b**p.d / (64.0 * p.K1 * p.L_H)
    t3 = (3.0 * p.L / (p.b ** (p.d + p.gamma) * t1)) ** (1.0 / p.gamma)
    return t1, t2, t3


def covering_radius(p: BoundParams) -> float:
    """tau = (b^(d+gamma) t1 / (3 L))^(1/gamma), the reciprocal of t3."""
    t1, _, _ = derived_thresholds(p)
    return (p.b ** (p.d + p.gamma) * t1 / (3.0 * p.L)) ** (1.0 / p.gamma)


def _log_covering(covering: Callable, theta: float, n: int) -> float:
    if hasattr(covering, "log"):
        return covering.log(theta, n)
    return _log(covering(theta, n))


def bound_table(p: BoundParams) -> Dict[str, float]:
    """
    Every ingredient of the bound.

    Returns:
        dict: t1, t2, t3, covering (the printed hypercube factor), log_n1,
        term1, term2, total and log_total
    """
    t1, t2, t3 = derived_thresholds(p)
    kd = p.kd
    log_cover = kd * math.log(math.sqrt(kd) * t3 / 2.0)
    log_n1 = _log_covering(p.covering, t2, p.n)
    exponent = p.mu * t1**2 * p.b ** (2 * p.d) / (2048.0 * p.K1**2)
    log_term1 = math.log(32.0) + log_cover + log_n1 - exponent

    beta_value = p.beta(2 * p.a * p.d) if p.mu > 1 else 0.0
    if beta_value < 0:
        raise NumericError(f"Mixing coefficient must be non-negative, got {beta_value}")
    if p.mu > 1 and beta_value > 0:
        log_term2 = math.log(4.0) + log_cover + math.log(p.mu - 1) + math.log(beta_value)
        term2 = _safe_exp(log_term2)
    else:
        log_term2 = -math.inf
        term2 = 0.0

    term1 = _safe_exp(log_term1)
    high = max(log_term1, log_term2)
    log_total = high + math.log1p(math.exp(min(log_term1, log_term2) - high)) if high > -math.inf else -math.inf
    return {
        "t1": t1,
        "t2": t2,
        "t3": t3,
        "covering": _safe_exp(log_cover),
        "log_n1": log_n1,
        "term1": term1,
        "term2": term2,
        "total": term1 + term2,
        "log_total": log_total,
    }


def theorem2_bound(p: BoundParams) -> float:
    """
    The concentration bound term1 + term2 (may be +inf).

    Raises:
        VacuousRegimeError: t1 <= 0
    """
    return bound_table(p)["total"]


def hypercube_covering(kd: int, tau: float) -> float:
    """
    tau-covering number bound (sqrt(kd) / (2 tau))^kd of the unit hypercube
    in R^kd, never below 1.
    """
    if not tau > 0:
        raise ArgumentError(f"Covering radius must be positive, got {tau}")
    log_value = kd * math.log(math.sqrt(kd) / (2.0 * tau))
    return 1.0 if log_value <= 0.0 else _safe_exp(log_value)


def _log_binomial(n: int, i: int) -> float:
    return sum(math.log(n - j) for j in range(i)) - math.lgamma(i + 1)


def log_linear_covering_bound(
    theta: float, weight_radius: float, input_dim: int, n: int
) -> float:
    """Logarithm of linear_covering_bound."""
    if not theta > 0:
        raise ArgumentError(f"Covering scale must be positive, got {theta}")
    if weight_radius < 0 or input_dim < 1 or n < 1:
        raise ArgumentError("Need weight_radius >= 0, input_dim >= 1 and n >= 1")
    value_range = 2.0 * weight_radius * math.sqrt(input_dim + 1)
    if value_range == 0.0:
        return 0.0
    pdim = input_dim + 1
    logs = [
        _log_binomial(n, i) + i * math.log(value_range / theta)
        for i in range(min(pdim, n) + 1)
    ]
    top = max(logs)
    return max(0.0, top + math.log(sum(math.exp(v - top) for v in logs)))


def linear_covering_bound(
    theta: float, weight_radius: float, input_dim: int, n: int
) -> float:
    """
    Covering number bound for affine predictors x -> w.x + bias with
    |(w, bias)| <= weight_radius on inputs in [0, 1]^input_dim.

    The class has pseudo-dimension p = input_dim + 1 and values in an interval
    of width B = 2 weight_radius sqrt(input_dim + 1), so (Anthony & Bartlett,
    Theorem 12.2)

        N1(theta, H, n) <= N_inf(theta, H, n) <= sum_{i=0}^{p} C(n, i) (B / theta)^i,

    a polynomial of degree p in n, decreasing in theta, equal to 1 when the
    class collapses to a single function.
    """
    return _safe_exp(log_linear_covering_bound(theta, weight_radius, input_dim, n))


@dataclass(frozen=True)
class LinearCovering:
    """Covering number function of a bounded linear class, log-space aware."""

    weight_radius: float
    input_dim: int

    def __call__(self, theta: float, n: int) -> float:
        return linear_covering_bound(theta, self.weight_radius, self.input_dim, n)

    def log(self, theta: float, n: int) -> float:
        return log_linear_covering_bound(theta, self.weight_radius, self.input_dim, n)


@dataclass(frozen=True)
class ExponentialMixing:
    """beta(j) = min(1, c1 exp(-c2 j)); c1 = 0 models an independent process."""

    c1: float = 1.0
    c2: float = 1.0

    def __call__(self, j: float) -> float:
        if self.c1 == 0.0:
            return 0.0
        return min(1.0, self.c1 * _safe_exp(-self.c2 * j))


@dataclass(frozen=True)
class PolynomialMixing:
    """beta(j) = min(1, c1 j^-c2)."""

    c1: float = 1.0
    c2: float = 1.0

    def __call__(self, j: float) -> float:
        return min(1.0, self.c1 * float(j) ** (-self.c2)) if j > 0 else 1.0


def block_schedule(N: int, d: int, target_mu: Optional[int] = None) -> Tuple[int, int]:
    """
    Integer block counts (mu, a) with 4 mu a d <= N.

    With target_mu, a = floor(N / (4 d mu)). Otherwise mu * a = floor(N / (4d))
    and mu is the largest divisor of that product not above its 2/3 power
    (the schedule under which the bound decays). Leftover points go to the
    last block.

    Raises:
        ArgumentError: N < 4d, or target_mu leaves no room for a block
    """
    if d < 1:
        raise ArgumentError(f"History length must be >= 1, got {d}")
    if N < 4 * d:
        raise ArgumentError(f"Sequence too short: N = {N} < 4d = {4 * d}")
    if target_mu is not None:
        if target_mu < 1:
            raise ArgumentError(f"target_mu must be >= 1, got {target_mu}")
        a = N // (4 * d * target_mu)
        if a < 1:
            raise ArgumentError(
                f"Sequence too short for mu = {target_mu}: N = {N} < 4*d*mu"
            )
        return int(target_mu), int(a)
    product = N // (4 * d)
    ceiling = max(1, math.ceil(product ** (2.0 / 3.0)))
    for mu in range(ceiling, max(0, ceiling - DIVISOR_SEARCH), -1):
        if product % mu == 0:
            return mu, product // mu
    return ceiling, product // ceiling


@dataclass
class ScalingRow:
    N: int
    mu: int
    a: int
    b: float
    terms: Dict[str, float] = field(default_factory=dict)
    error: str = ""

    @property
    def log_total(self) -> float:
        return self.terms.get("log_total", math.nan)


def decay_schedule(N: int, d: int) -> Tuple[int, int, float]:
    """
    mu ~ N^(2/3), 2ad ~ N^(1/3), b = N^(-1/(6d)), rounded to integers with
    4 mu a d <= N.
    """
    a = max(1, int(N ** (1.0 / 3.0) / (2 * d)))
    mu = max(1, N // (4 * a * d))
    b = float(N) ** (-1.0 / (6.0 * d))
    return int(mu), int(a), b


def scaling_check(
    N_grid: Sequence[int], d: int, template: BoundParams
) -> List[ScalingRow]:
    """
    Evaluate the bound along the decay schedule for every N of the grid.

    The template provides t, k, the kernel, density and loss constants, the
    mixing coefficient function and the covering function; N, b, mu and a
    are replaced per row. Vacuous or infeasible rows are reported, not raised.
    """
    rows = []
    for N in N_grid:
        N = int(N)
        if N < 4 * d:
            rows.append(ScalingRow(N, 0, 0, math.nan, error=f"sequence too short (N < {4 * d})"))
            continue
        mu, a, b = decay_schedule(N, d)
        try:
            params = replace(template, N=N, d=d, b=b, mu=mu, a=a)
            rows.append(ScalingRow(N, mu, a, b, bound_table(params)))
        except (VacuousRegimeError, ArgumentError) as e:
            logger.info(f"Scaling row N={N}: {e}")
            rows.append(ScalingRow(N, mu, a, b, error=str(e)))
    return rows


def beta_from_config(config: Dict[str, Any]) -> Callable[[int], float]:
    """
    Mixing coefficient function from its JSON description.

    {"kind": "zero"} | {"kind": "exponential", "c1": .., "c2": ..} |
    {"kind": "polynomial", "c1": .., "c2": ..} |
    {"kind": "chain", "chain_seed": ..} | {"kind": "chain", "process_spec": {...}}
    """
    kind = config.get("kind", "exponential")
    if kind == "zero":
        return ExponentialMixing(c1=0.0)
    if kind == "exponential":
        return ExponentialMixing(float(config.get("c1", 1.0)), float(config.get("c2", 1.0)))
    if kind == "polynomial":
        return PolynomialMixing(float(config.get("c1", 1.0)), float(config.get("c2", 1.0)))
    if kind == "chain":
        from .processes import HiddenMarkovSpec, beta_mixing_bound, random_chain

        if "process_spec" in config:
            spec = HiddenMarkovSpec.from_dict(config["process_spec"])
        else:
            spec = random_chain(int(config.get("chain_seed", 1)))
        return lambda j: beta_mixing_bound(spec, int(math.floor(j)))
    raise ConfigError(f"Unknown mixing coefficient kind '{kind}'")


def covering_from_config(config: Dict[str, Any]) -> Callable[[float, int], float]:
    """
    Covering number function from its JSON description.

    {"kind": "linear", "weight_radius": .., "input_dim": ..} |
    {"kind": "constant", "value": ..}
    """
    kind = config.get("kind", "linear")
    if kind == "linear":
        return LinearCovering(
            float(config.get("weight_radius", 1.0)), int(config.get("input_dim", 2))
        )
    if kind == "constant":
        value = float(config.get("value", 1.0))
        return lambda theta, n: value
    raise ConfigError(f"Unknown covering number kind '{kind}'")


def params_from_config(config: Dict[str, Any]) -> BoundParams:
    """
    BoundParams from a JSON document.

    Scalars use their symbol names (t, N, k, d, b, K1, K2, L, gamma, D0, D1,
    D2, L_H, L_R, mu, a); "beta" and "covering" are descriptions for
    beta_from_config and covering_from_config. When mu/a are missing the
    block schedule picks them.
    """
    try:
        values = {
            key: config[key]
            for key in ("t", "N", "k", "d", "b", "K1", "K2", "L", "gamma", "D0", "D2", "L_H")
        }
    except KeyError as e:
        raise ConfigError(f"Missing bound parameter {e}")
    values["N"], values["k"], values["d"] = int(values["N"]), int(values["k"]), int(values["d"])
    if "mu" in config and "a" in config:
        mu, a = config["mu"], config["a"]
    else:
        mu, a = block_schedule(values["N"], values["d"], config.get("mu"))
    return BoundParams(
        **values,
        beta=beta_from_config(config.get("beta", {"kind": "zero"})),
        covering=covering_from_config(config.get("covering", {"kind": "linear"})),
        mu=mu,
        a=a,
        D1=config.get("D1"),
        L_R=config.get("L_R"),
    )
