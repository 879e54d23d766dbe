# backend/core/cascadebai/models/instance.py
# ------------------------------------------------------------
# Problem instance for cascading best-arm identification.
# - Instance holds the click probabilities w, arm size K,
#   tolerance epsilon and risk delta.
# - validate() canonicalizes: weights sorted nonincreasing, with
#   an index map back to the caller's order. Every formula in
#   this package assumes w(1) >= ... >= w(L).
# - gaps() builds the GapProfile (gaps, adjusted gaps, K', sigma
#   and per-item observation thresholds).
#
# Indices are 0-based. "Position i" below means canonical
# position i, i.e. the (i+1)-th largest weight.
# ------------------------------------------------------------

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from ..errors import (
    BadDelta,
    BadK,
    DegenerateBoundary,
    EmptyWeights,
    NonPositiveGap,
    WeightOutOfRange,
)

# An arm is an ordered tuple of distinct item indices (top of the list first).
Arm = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Instance:
    """
    Click probabilities plus the (K, epsilon, delta) triple.

    `index_map[c]` is the caller's index of canonical item c. It is None
    until validate() has run.
    """
    weights: np.ndarray
    K: int
    epsilon: float = 0.0
    delta: float = 0.1
    index_map: np.ndarray | None = field(default=None)

    @property
    def L(self) -> int:
        return int(len(self.weights))

    @property
    def is_canonical(self) -> bool:
        return self.index_map is not None

    @property
    def w_star(self) -> float:
        """Largest click probability w(1)."""
        return float(np.max(self.weights))

    @property
    def w_min(self) -> float:
        """Smallest click probability w' = w(L)."""
        return float(np.min(self.weights))

    @property
    def k_prime(self) -> int:
        return k_prime(self.weights, self.K, self.epsilon)

    def optimal_items(self) -> frozenset[int]:
        """Canonical indices of the epsilon-optimal items, i.e. [K']."""
        return frozenset(range(self.k_prime))

    def to_user_indices(self, items: Iterable[int]) -> list[int]:
        """Translate canonical item indices back to the caller's indexing."""
        if self.index_map is None:
            return [int(i) for i in items]
        return [int(self.index_map[i]) for i in items]

    def with_delta(self, delta: float) -> "Instance":
        return replace(self, delta=float(delta))


@dataclass(frozen=True, eq=False)
class GapProfile:
    """Gap quantities of a canonical instance (all vectors in canonical order)."""
    deltas: np.ndarray
    bar_deltas: np.ndarray
    k_prime: int
    sigma: np.ndarray
    thresholds: np.ndarray

    def sorted_thresholds(self) -> np.ndarray:
        """T-bar in sigma order: entry j is T-bar of sigma(j+1) (nondecreasing)."""
        return self.thresholds[self.sigma]


# ------------------------------------------------------------
# Construction helpers
# ------------------------------------------------------------

def make_instance(
    weights: Sequence[float] | np.ndarray,
    K: int,
    epsilon: float = 0.0,
    delta: float = 0.1,
) -> Instance:
    """Build and validate in one call."""
    return validate(Instance(np.asarray(weights, dtype=float), int(K), float(epsilon), float(delta)))


def two_prob_weights(w_star: float, w_prime: float, K: int, L: int) -> np.ndarray:
    """K optimal items with probability w_star, L-K suboptimal ones with w_prime."""
    if not 0.0 < w_prime < w_star <= 1.0:
        raise WeightOutOfRange(f"two-probability instance needs 0 < w' < w* <= 1, got w*={w_star}, w'={w_prime}")
    if not 1 <= K < L:
        raise BadK(f"two-probability instance needs 1 <= K < L, got K={K}, L={L}")
    return np.concatenate([np.full(K, float(w_star)), np.full(L - K, float(w_prime))])


def linspace_weights(w_max: float, w_min: float, L: int) -> np.ndarray:
    """L evenly spaced probabilities from w_max down to w_min."""
    if L < 2:
        raise EmptyWeights(f"need at least two items, got L={L}")
    if not 0.0 <= w_min < w_max <= 1.0:
        raise WeightOutOfRange(f"linspace needs 0 <= w_min < w_max <= 1, got {w_max}..{w_min}")
    return np.linspace(float(w_max), float(w_min), int(L))


# ------------------------------------------------------------
# Operations
# ------------------------------------------------------------

def rho(delta: float, L: int) -> float:
    """rho(delta) = sqrt(delta / (12 L))."""
    if not 0.0 < delta < 1.0:
        raise BadDelta(f"delta must lie in (0, 1), got {delta}")
    if L < 1:
        raise BadK(f"L must be positive, got {L}")
    return math.sqrt(delta / (12.0 * L))


def validate(instance: Instance) -> Instance:
    """
    Check the instance and return its canonical form.

    Weights are sorted nonincreasing with a stable sort, so equal weights
    keep the caller's relative order; index_map records where each
    canonical item came from.
    """
    w = np.asarray(instance.weights, dtype=float).ravel()
    if w.size < 2:
        raise EmptyWeights(f"need at least two items, got {w.size}")
    if not np.all(np.isfinite(w)) or np.any(w < 0.0) or np.any(w > 1.0):
        raise WeightOutOfRange("every click probability must lie in [0, 1]")

    L = int(w.size)
    K = int(instance.K)
    if not 1 <= K <= L:
        raise BadK(f"K must satisfy 1 <= K <= L={L}, got {K}")
    eps = float(instance.epsilon)
    if not math.isfinite(eps) or eps < 0.0:
        raise BadK(f"epsilon must be a finite nonnegative number, got {instance.epsilon}")
    if not 0.0 < instance.delta < 1.0:
        raise BadDelta(f"delta must lie in (0, 1), got {instance.delta}")

    order = np.argsort(-w, kind="stable")
    canonical = w[order]
    if K < L and canonical[K - 1] == canonical[K]:
        raise DegenerateBoundary(f"w(K) == w(K+1) == {canonical[K]}: the optimal arm is not unique")

    if instance.index_map is not None:
        order = np.asarray(instance.index_map)[order]

    canonical.setflags(write=False)
    order.setflags(write=False)
    return Instance(canonical, K, eps, float(instance.delta), order)


def k_prime(weights: np.ndarray, K: int, epsilon: float) -> int:
    """K' = max{i : w(i) >= w(K) - epsilon} on canonical weights (a count, >= K)."""
    w = np.asarray(weights, dtype=float)
    return int(np.count_nonzero(w >= w[K - 1] - epsilon))


def threshold(bar_delta: float, delta: float, L: int) -> int:
    """
    Observations needed to identify an item with adjusted gap bar_delta:

        1 + floor( 216/bd^2 * log( (2/rho) * log2( 648 / (rho bd^2) ) ) )

    Very wide gaps (large epsilon) push the log argument to 1 or below;
    the count is then clamped at its floor of 1.
    """
    if not bar_delta > 0.0:
        raise NonPositiveGap(f"adjusted gap must be positive, got {bar_delta}")
    r = rho(delta, L)
    bd2 = bar_delta * bar_delta
    inner = (2.0 / r) * math.log2(648.0 / (r * bd2))
    if inner <= 1.0:
        return 1
    return max(1, 1 + int(math.floor((216.0 / bd2) * math.log(inner))))


def gaps(instance: Instance) -> GapProfile:
    """Gap profile of a canonical instance."""
    if not instance.is_canonical:
        instance = validate(instance)

    w = instance.weights
    L, K, eps = instance.L, instance.K, instance.epsilon
    kp = k_prime(w, K, eps)

    deltas = np.empty(L)
    if K < L:
        deltas[:K] = w[:K] - w[K]
        deltas[K:] = w[K - 1] - w[K:]
    else:
        # No suboptimal items: every gap is taken as the widest possible one.
        deltas[:] = 1.0

    bar = np.empty(L)
    bar[:K] = deltas[:K] + eps
    bar[K:kp] = deltas[K - 1] - deltas[K:kp] + eps
    bar[kp:] = deltas[kp:] - eps

    # ties go to the smaller caller index
    sigma = np.lexsort((np.asarray(instance.index_map), -bar))
    thresholds = np.array([threshold(float(b), instance.delta, L) for b in bar], dtype=np.int64)

    for arr in (deltas, bar, sigma, thresholds):
        arr.setflags(write=False)
    return GapProfile(deltas=deltas, bar_deltas=bar, k_prime=kp, sigma=sigma, thresholds=thresholds)


def check_arm(arm: Sequence[int], L: int, K: int) -> Arm:
    """Validate an arm: distinct indices in [0, L), length at most K."""
    items = tuple(int(i) for i in arm)
    if len(items) > K:
        raise BadK(f"arm has {len(items)} items, more than K={K}")
    if len(set(items)) != len(items):
        raise BadK(f"arm repeats an item: {items}")
    if any(i < 0 or i >= L for i in items):
        raise BadK(f"arm item outside [0, {L}): {items}")
    return items
