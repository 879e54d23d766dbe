# backend/core/cascadebai/models/bounds.py
# ------------------------------------------------------------
# Analytic sample-complexity quantities.
# - mu_lower / mu_upper: expected observations per step under the
#   most / least favourable ordering of k items.
# - v_param: second-moment parameter of the observation count.
# - upper_bound_terms(): N1, N2, N3 (or N1', N2' when K' >= 2K-1).
# - lower_bound(): KL-based lower bound on the optimal expected time.
# - lsg_check(): numerical check of the left-sided sub-Gaussian
#   inequality on a finite distribution.
#
# Universal constants c1, c2, c3 are unknown, so only raw N-terms
# are reported; ratios against empirical stopping times are the
# harness's job.
# ------------------------------------------------------------

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.special import logsumexp, xlogy

from ..errors import BadDistribution, DegenerateQ, EpsilonNotZero, WeightOutOfRange, ZeroMinWeight
from ..integrations.click_model import expected_observations, observation_distribution
from .instance import GapProfile, Instance, gaps, validate

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA_GRID = tuple(-np.logspace(-3, 2, 40))


class Regime(str, Enum):
    K_PRIME_LT_2K_MINUS_1 = "KPrimeLt2Km1"
    K_PRIME_GE_2K_MINUS_1 = "KPrimeGe2Km1"


@dataclass(frozen=True, eq=False)
class BoundReport:
    """
    Raw terms of the upper bound plus the lower bound.

    In the K' >= 2K-1 regime n1/n2 hold N1'/N2' and n3 is None.
    mu, mu_tilde and v are indexed by k-1 for k = 1..K.
    """
    regime: Regime
    n1: float
    n2: float
    n3: float | None
    n3_expanded: float | None
    k1: int
    k2: int
    k_prime: int
    m: np.ndarray
    lower_bound: float | None
    mu: np.ndarray
    mu_tilde: np.ndarray
    v: np.ndarray
    thresholds: np.ndarray

    @property
    def total(self) -> float:
        return self.n1 + self.n2 + (self.n3 or 0.0)


@dataclass(frozen=True)
class LSGResult:
    passed: bool
    max_violation: float
    worst_lambda: float | None


# ------------------------------------------------------------
# Observation-count parameters
# ------------------------------------------------------------

def mu_lower(k: int, weights: Sequence[float] | np.ndarray) -> float:
    """mu(k, w): expected observations when the k largest weights are shown largest first."""
    w = np.sort(np.asarray(weights, dtype=float))[::-1]
    return expected_observations(w[:k])


def mu_upper(k: int, weights: Sequence[float] | np.ndarray) -> float:
    """mu~(k, w): expected observations when the k smallest weights are shown smallest first."""
    w = np.sort(np.asarray(weights, dtype=float))
    return expected_observations(w[:k])


def mu_lower_analytic(k: int, w_star: float) -> float:
    """min{k/2, 1/(2 w*)}, the closed-form floor under mu_k."""
    return min(k / 2.0, math.inf if w_star == 0 else 1.0 / (2.0 * w_star))


def mu_upper_analytic(k: int, w_min: float) -> float:
    """min{1/w', k}, the closed-form ceiling over mu~_k."""
    return float(k) if w_min == 0 else min(1.0 / w_min, float(k))


def v_param(k: int, w_min: float) -> float:
    """v_k = min{k, sqrt(2)/w'}."""
    if w_min <= 0.0:
        raise ZeroMinWeight("v_k needs a strictly positive smallest weight")
    return min(float(k), math.sqrt(2.0) / w_min)


def _v_or_k(k: int, w_min: float) -> float:
    # w' = 0 is the limit where the sqrt(2)/w' branch never binds.
    return float(k) if w_min <= 0.0 else v_param(k, w_min)


# ------------------------------------------------------------
# Upper bound
# ------------------------------------------------------------

def n1_case_bound(K: int, w_star: float, w_min: float, delta: float) -> float:
    """Closed-form ceiling on N1 in terms of w* and w' (two cases split at w* = 1/K)."""
    if w_star <= 1.0 / K:
        return 4.0 * K * math.log(4.0 * K / delta)
    if w_min <= 0.0:
        raise ZeroMinWeight("the w* > 1/K case divides by w'")
    c = 8.0 * K * w_star ** 2 / w_min ** 2
    return c * math.log(c / delta)


def n3_telescoping(mu: np.ndarray, ts: np.ndarray, K: int, Kp: int, L: int) -> float:
    """
    sum_{k=2}^{2K-K'} (K-k+1)/mu_{K-k+1} * [T(sigma(L-K+k)) - T(sigma(L-K+k-1))]

    `mu[j-1]` is mu_j and `ts[p-1]` is T-bar of sigma(p).
    """
    total = 0.0
    for k in range(2, 2 * K - Kp + 1):
        a = (K - k + 1) / mu[K - k]
        total += a * float(ts[L - K + k - 1] - ts[L - K + k - 2])
    return total


def n3_summation_by_parts(mu: np.ndarray, ts: np.ndarray, K: int, Kp: int, L: int) -> float:
    """
    Exact rewrite of n3_telescoping:
        a_m t_m - a_2 t_1 + sum_{k=2}^{m-1} M_k t_k,   m = 2K-K',
    with a_k = (K-k+1)/mu_{K-k+1}, t_k = T(sigma(L-K+k)), M_k = a_k - a_{k+1}.
    """
    m = 2 * K - Kp
    if m < 2:
        return 0.0

    def a(k: int) -> float:
        return (K - k + 1) / mu[K - k]

    def t(k: int) -> float:
        return float(ts[L - K + k - 1])

    total = a(m) * t(m) - a(2) * t(1)
    for k in range(2, m):
        total += (a(k) - a(k + 1)) * t(k)
    return total


def m_coefficients(mu: np.ndarray, K: int, K1: int) -> np.ndarray:
    """M_k = (K+1-k)/mu_{K+1-k} - (K-k)/mu_{K-k} for k = 1..K-K1-1."""
    return np.array(
        [(K + 1 - k) / mu[K - k] - (K - k) / mu[K - k - 1] for k in range(1, K - K1)],
        dtype=float,
    )


def n3_expanded(mu: np.ndarray, ts: np.ndarray, K: int, K1: int, L: int, last_position: int) -> float:
    """
    sum_{k=1}^{K-K1-1} M_k T(sigma(L-K+k)) + ((K1+1)/mu_{K1+1} - 2) T(sigma(L-K1))
        + 2 T(sigma(last_position))

    The theorem statement uses last_position = L - K2.
    """
    m = m_coefficients(mu, K, K1)
    total = sum(float(m[k - 1]) * float(ts[L - K + k - 1]) for k in range(1, K - K1))
    total += ((K1 + 1) / mu[K1] - 2.0) * float(ts[L - K1 - 1])
    total += 2.0 * float(ts[last_position - 1])
    return total


def upper_bound_terms(instance: Instance, gap_profile: GapProfile | None = None) -> BoundReport:
    """Raw terms of the high-probability upper bound on the stopping time."""
    if not instance.is_canonical:
        instance = validate(instance)
    profile = gap_profile if gap_profile is not None else gaps(instance)

    w = instance.weights
    L, K, delta = instance.L, instance.K, instance.delta
    Kp = profile.k_prime
    w_star, w_min = instance.w_star, instance.w_min
    ts = profile.sorted_thresholds()

    mu = np.array([mu_lower(k, w) for k in range(1, K + 1)])
    mu_tilde = np.array([mu_upper(k, w) for k in range(1, K + 1)])
    v = np.array([_v_or_k(k, w_min) for k in range(1, K + 1)])

    inv_w_star = K - 1 if w_star == 0 else min(math.floor(1.0 / w_star), K - 1)
    K1 = max(Kp - K, inv_w_star)
    K2 = max(Kp - K, 1)

    lb: float | None = None
    if instance.epsilon == 0:
        try:
            lb = lower_bound(instance)
        except DegenerateQ as exc:
            logger.info("lower bound skipped: %s", exc)

    if Kp >= 2 * K - 1:
        n1 = 2.0 * v[K - 1] ** 2 / mu[K - 1] ** 2 * math.log(2.0 / delta)
        head = float(np.sum(ts[: L - Kp + K - 1]))
        n2 = (2.0 / mu[K - 1]) * (head + (Kp - K + 1) * float(ts[L - Kp + K - 1]) + (Kp - K))
        report = BoundReport(
            regime=Regime.K_PRIME_GE_2K_MINUS_1, n1=n1, n2=n2, n3=None, n3_expanded=None,
            k1=K1, k2=K2, k_prime=Kp, m=np.empty(0), lower_bound=lb,
            mu=mu, mu_tilde=mu_tilde, v=v, thresholds=profile.thresholds,
        )
    else:
        c = np.array([v[K - k] ** 2 / mu[K - k] ** 2 for k in range(1, K - K2 + 1)])
        n1 = float(np.sum(c) * math.log(np.sum(c) / delta)) if c.size else 0.0
        n2 = float(np.sum(ts[: L - K])) / mu[K - 1]
        report = BoundReport(
            regime=Regime.K_PRIME_LT_2K_MINUS_1,
            n1=n1,
            n2=n2,
            n3=n3_telescoping(mu, ts, K, Kp, L),
            n3_expanded=n3_expanded(mu, ts, K, K1, L, L - K2),
            k1=K1, k2=K2, k_prime=Kp, m=m_coefficients(mu, K, K1), lower_bound=lb,
            mu=mu, mu_tilde=mu_tilde, v=v, thresholds=profile.thresholds,
        )

    logger.debug("bound report regime=%s n1=%.4g n2=%.4g n3=%s", report.regime.value, report.n1, report.n2, report.n3)
    return report


def stopping_time_bound(total_observations: float, mu_k: float, v_k: float, delta: float) -> float:
    """Steps needed to collect `total_observations` off the concentration event: 2T/mu + 2 log(1/delta) v^2/mu^2."""
    return 2.0 * total_observations / mu_k + 2.0 * math.log(1.0 / delta) * v_k ** 2 / mu_k ** 2


# ------------------------------------------------------------
# Lower bound
# ------------------------------------------------------------

def kl_bernoulli(p: float, q: float) -> float:
    """KL(Bern(p) || Bern(q)) with 0 log 0 = 0."""
    if not 0.0 < q < 1.0:
        raise DegenerateQ(f"q must lie in (0, 1), got {q}")
    if not 0.0 <= p <= 1.0:
        raise WeightOutOfRange(f"p must lie in [0, 1], got {p}")
    return max(0.0, float(xlogy(p, p / q) + xlogy(1.0 - p, (1.0 - p) / (1.0 - q))))


def lower_bound(instance: Instance) -> float:
    """
    log(1/(2.4 delta)) / mu~_K * [ sum_{i<=K} 1/d(i, K+1) + sum_{j>K} 1/d(j, K) ].

    Clamped at zero: for delta >= 1/2.4 the log factor is nonpositive.
    """
    if instance.epsilon != 0:
        raise EpsilonNotZero(f"the lower bound is stated for epsilon = 0, got {instance.epsilon}")
    if not instance.is_canonical:
        instance = validate(instance)

    w = instance.weights
    K, L = instance.K, instance.L
    if K == L:
        return 0.0

    head = sum(1.0 / kl_bernoulli(float(w[i]), float(w[K])) for i in range(K))
    tail = sum(1.0 / kl_bernoulli(float(w[j]), float(w[K - 1])) for j in range(K, L))
    factor = math.log(1.0 / (2.4 * instance.delta)) / mu_upper(K, w)
    return max(0.0, factor * (head + tail))


def lower_bound_two_prob(w_star: float, w_prime: float, K: int, L: int, delta: float) -> float:
    """KL(1-delta, delta)/mu~_K * [K/KL(w*, w') + (L-K)/KL(w', w*)] for two-probability instances."""
    mu_tilde = (1.0 - (1.0 - w_prime) ** K) / w_prime
    bracket = K / kl_bernoulli(w_star, w_prime) + (L - K) / kl_bernoulli(w_prime, w_star)
    return kl_bernoulli(1.0 - delta, delta) / mu_tilde * bracket


# ------------------------------------------------------------
# Left-sided sub-Gaussian check
# ------------------------------------------------------------

def lsg_check(
    atom_distribution: Sequence[tuple[float, float]],
    v: float,
    lambda_grid: Sequence[float] | None = None,
) -> LSGResult:
    """
    Compare E[exp(lambda (X - EX))] with exp(v^2 lambda^2 / 2) on every
    lambda of the grid (all <= 0). Work is done in log space so large
    |lambda| does not overflow.
    """
    if not atom_distribution:
        raise BadDistribution("empty distribution")
    values = np.array([float(x) for x, _ in atom_distribution])
    probs = np.array([float(p) for _, p in atom_distribution])
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
        raise BadDistribution(f"probabilities must be nonnegative and sum to 1, got sum {probs.sum()!r}")

    grid = np.asarray(DEFAULT_LAMBDA_GRID if lambda_grid is None else lambda_grid, dtype=float)
    if np.any(grid > 0):
        raise ValueError("lambda grid must be nonpositive")

    mean = float(np.dot(values, probs))
    keep = probs > 0
    log_p = np.log(probs[keep])
    centred = values[keep] - mean

    log_mgf = np.array([logsumexp(log_p + lam * centred) for lam in grid])
    log_bound = 0.5 * v * v * grid * grid
    excess = log_mgf - log_bound

    with np.errstate(over="ignore"):
        gap = np.where(excess > 0, np.exp(log_bound) * np.expm1(excess), 0.0)

    worst = int(np.argmax(excess)) if grid.size else None
    passed = bool(np.all(excess <= 1e-12))
    return LSGResult(
        passed=passed,
        max_violation=float(np.max(gap)) if grid.size else 0.0,
        worst_lambda=None if passed or worst is None else float(grid[worst]),
    )


def observation_lsg_check(weights_in_order: Sequence[float], v: float | None = None,
                          lambda_grid: Sequence[float] | None = None) -> LSGResult:
    """lsg_check on the observation count of an arm; v defaults to sqrt(E X^2)."""
    atoms = observation_distribution(weights_in_order)
    if v is None:
        v = math.sqrt(sum(x * x * p for x, p in atoms))
    return lsg_check(atoms, v, lambda_grid)


def concentration_event_frequency(
    arm_weights: Sequence[float],
    n: int,
    delta: float,
    repetitions: int,
    rng: np.random.Generator,
) -> float:
    """
    Monte-Carlo frequency of  sum_{t<=n} X_t <= n mu_k - sqrt(2 n v_k^2 log(1/delta))
    for i.i.d. observation counts of a fixed arm.
    """
    w = np.asarray(arm_weights, dtype=float)
    k = int(w.size)
    atoms = observation_distribution(w)
    values = np.array([x for x, _ in atoms], dtype=float)
    probs = np.array([p for _, p in atoms])
    probs = probs / probs.sum()

    mu_k = mu_lower(k, w)
    v_k = _v_or_k(k, float(w.min()))
    cutoff = n * mu_k - math.sqrt(2.0 * n * v_k * v_k * math.log(1.0 / delta))

    counts = rng.multinomial(n, probs, size=repetitions)
    sums = counts @ values
    return float(np.mean(sums <= cutoff))
