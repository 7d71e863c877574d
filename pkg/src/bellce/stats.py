"""Shot budgets and binomial confidence intervals for the singlet-count estimators."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import bdtr, bdtrc
from scipy.stats import binom

from .errors import ContractViolation, NumericalError

BISECTION_TOL = 1e-10
BISECTION_MAX_ITER = 200
WEIGHT_CUTOFF = 1e-15


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float

    def __post_init__(self):
        if not 0.0 <= self.lower <= self.upper <= 1.0:
            raise NumericalError(f"malformed interval [{self.lower}, {self.upper}]")

    def contains(self, p: float) -> bool:
        return self.lower <= p <= self.upper

    @property
    def half_width(self) -> float:
        return (self.upper - self.lower) / 2


@dataclass(frozen=True)
class BudgetPlan:
    epsilon: float
    delta: float
    M_hoeffding: int
    M_cp: int | None = None
    assumed_p: float | None = None
    warnings: tuple[str, ...] = field(default_factory=tuple)


def _check_delta(delta: float) -> None:
    if not 0.0 < delta < 1.0:
        raise ContractViolation(f"delta must lie in (0, 1), got {delta}")


def _check_epsilon(epsilon: float) -> None:
    if not 0.0 < epsilon <= 1.0:
        raise ContractViolation(f"epsilon must lie in (0, 1], got {epsilon}")


def _check_M(M: int) -> int:
    if int(M) != M or M < 1:
        raise ContractViolation(f"M must be a positive integer, got {M}")
    return int(M)


def hoeffding_shots(epsilon: float, delta: float) -> int:
    """Smallest M with ``2 exp(-2 M eps^2) <= delta``."""
    _check_epsilon(epsilon)
    _check_delta(delta)
    return max(1, math.ceil(math.log(2 / delta) / (2 * epsilon**2)))


def hoeffding_epsilon(M: int, delta: float) -> float:
    """Additive error guaranteed with probability ``1 - delta`` after ``M`` rounds."""
    M = _check_M(M)
    _check_delta(delta)
    return math.sqrt(math.log(2 / delta) / (2 * M))


def _bisect(f, target: float, increasing: bool, shape) -> np.ndarray:
    """Vectorized bisection for ``f(p) = target`` on [0, 1] with monotone ``f``."""
    lo = np.zeros(shape)
    hi = np.ones(shape)
    for _ in range(BISECTION_MAX_ITER):
        mid = (lo + hi) / 2
        above = f(mid) > target
        if increasing:
            hi = np.where(above, mid, hi)
            lo = np.where(above, lo, mid)
        else:
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        if np.all(hi - lo <= BISECTION_TOL):
            return (lo + hi) / 2
    raise NumericalError("Clopper-Pearson bisection did not converge")


def clopper_pearson_bounds(k, M: int, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized Clopper-Pearson endpoints for an array of success counts ``k``."""
    M = _check_M(M)
    _check_delta(delta)
    k = np.atleast_1d(np.asarray(k))
    if np.any(k < 0) or np.any(k > M) or np.any(k != np.floor(k)):
        raise ContractViolation(f"success counts must be integers in [0, {M}]")
    k = k.astype(np.float64)
    half = delta / 2
    # P(X <= k) decreases in p; P(X >= k) = P(X > k - 1) increases in p
    upper = _bisect(lambda p: bdtr(k, M, p), half, increasing=False, shape=k.shape)
    lower = _bisect(lambda p: bdtrc(k - 1, M, p), half, increasing=True, shape=k.shape)
    upper = np.where(k == M, 1.0, upper)
    lower = np.where(k == 0, 0.0, lower)
    return lower, upper


def clopper_pearson(k: int, M: int, delta: float) -> ConfidenceInterval:
    """Exact binomial interval at level ``1 - delta`` for ``k`` successes in ``M`` rounds."""
    if int(k) != k:
        raise ContractViolation(f"k must be an integer, got {k}")
    lo, hi = clopper_pearson_bounds([int(k)], M, delta)
    return ConfidenceInterval(float(lo[0]), float(hi[0]), 1 - delta)


@dataclass(frozen=True)
class ExpectedBounds:
    mean_lower: float
    mean_upper: float
    half_width: float
    truncated_mass: float


def expected_ci_bounds(p: float, M: int, delta: float) -> ExpectedBounds:
    """Binomial averages of the Clopper-Pearson endpoints when the true rate is ``p``.

    Success counts whose binomial weight is below 1e-15 are dropped; their
    total probability is reported as ``truncated_mass``.
    """
    if not 0.0 <= p <= 1.0:
        raise ContractViolation(f"p must lie in [0, 1], got {p}")
    M = _check_M(M)
    _check_delta(delta)
    ks = np.arange(M + 1)
    lo_k, hi_k = binom.ppf([WEIGHT_CUTOFF, 1 - WEIGHT_CUTOFF], M, p)
    ks = ks[int(max(lo_k - 1, 0)): int(min(hi_k + 1, M)) + 1]
    w = binom.pmf(ks, M, p)
    keep = w >= WEIGHT_CUTOFF
    ks, w = ks[keep], w[keep]
    truncated = max(0.0, 1.0 - float(w.sum()))
    lower, upper = clopper_pearson_bounds(ks, M, delta)
    mean_lower = float(np.dot(w, lower) / w.sum())
    mean_upper = float(np.dot(w, upper) / w.sum())
    return ExpectedBounds(mean_lower, mean_upper, (mean_upper - mean_lower) / 2, truncated)


def expected_ci_width(p: float, M: int, delta: float) -> float:
    """Half of the binomially averaged Clopper-Pearson width."""
    return expected_ci_bounds(p, M, delta).half_width


def _search_cp_shots(epsilon: float, delta: float, p: float, max_doublings: int = 40) -> int:
    if expected_ci_width(p, 1, delta) <= epsilon:
        return 1
    lo, hi = 1, 2
    for _ in range(max_doublings):
        if expected_ci_width(p, hi, delta) <= epsilon:
            break
        lo, hi = hi, hi * 2
    else:
        raise NumericalError(f"expected CI half width never reached {epsilon}")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if expected_ci_width(p, mid, delta) <= epsilon:
            hi = mid
        else:
            lo = mid
    return hi


def plan_budget(
    target_epsilon: float,
    delta: float,
    assumed_p: float | None = None,
    subsystem_size: int | None = None,
) -> BudgetPlan:
    """Rounds needed for half width ``target_epsilon`` at confidence ``1 - delta``.

    ``M_cp`` is the smallest M whose expected Clopper-Pearson half width is
    within target (only when ``assumed_p`` is given). ``subsystem_size``
    triggers an advisory when the target is coarser than the ``2^-|alpha|``
    scale that a subsystem-purity estimate needs.
    """
    M_h = hoeffding_shots(target_epsilon, delta)
    warnings = []
    if subsystem_size is not None:
        if subsystem_size < 1:
            raise ContractViolation("subsystem_size must be positive")
        scale = 2.0**-subsystem_size
        if target_epsilon > scale:
            warnings.append(
                f"epsilon={target_epsilon:g} exceeds 2^-{subsystem_size}={scale:g}; "
                "purity estimates for a subsystem this large need a tighter target"
            )
    M_cp = None
    if assumed_p is not None:
        if not 0.0 <= assumed_p <= 1.0:
            raise ContractViolation(f"assumed_p must lie in [0, 1], got {assumed_p}")
        M_cp = _search_cp_shots(target_epsilon, delta, assumed_p)
    return BudgetPlan(target_epsilon, delta, M_h, M_cp, assumed_p, tuple(warnings))
