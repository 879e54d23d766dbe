# backend/core/cascadebai/integrations/click_model.py
# ------------------------------------------------------------
# Cascade click model: the simulated "user" the agents talk to.
# - cascade_step(): one user visit. The user scans the list top
#   down and clicks the first attractive item; nothing after the
#   click (or after the list, if no click) is observed.
# - Exact moments of the observation count X, three ways: the
#   closed-form sum, the k-atom distribution, and a 2^k brute-force
#   enumeration used as an independent oracle in tests.
# - RngSpec / UniformStream give every trial its own reproducible
#   stream, independent of how trials are scheduled.
#
# Example:
#   env = CascadeClickEnv(instance.weights, RngSpec(7, 0).stream())
#   fb = env.pull((0, 3, 5))
#   fb.click_position  # 1-based rank in the list, or None
# ------------------------------------------------------------

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from ..errors import ArmTooLong

ATOM_CAP = 25
BRUTE_FORCE_CAP = 20


@dataclass(frozen=True, slots=True)
class CascadeFeedback:
    """
    Censored outcome of one step.

    click_position is the 1-based rank of the clicked slot (None = no click);
    observed_count is how many slots' Bernoulli outcomes were revealed.
    """
    click_position: int | None
    observed_count: int


@dataclass(frozen=True)
class RngSpec:
    """Per-trial seed derivation: a pure function of (master_seed, trial_index)."""
    master_seed: int
    trial_index: int

    def seed(self) -> int:
        ss = np.random.SeedSequence(entropy=int(self.master_seed), spawn_key=(int(self.trial_index),))
        return int(ss.generate_state(1, dtype=np.uint64)[0])

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(self.seed())

    def stream(self, block: int = 8192) -> "UniformStream":
        return UniformStream(self.generator(), block=block)


class UniformStream:
    """
    Buffered U(0,1) draws from one Generator.

    Refilling in blocks keeps the per-step cost low; the sequence of
    values handed out depends only on the generator's seed.
    """

    def __init__(self, rng: np.random.Generator, block: int = 8192):
        self._rng = rng
        self._block = max(int(block), ATOM_CAP)
        self._buf = rng.random(self._block)
        self._pos = 0

    def take(self, k: int) -> np.ndarray:
        if self._pos + k > self._buf.size:
            rest = self._buf[self._pos:]
            self._buf = np.concatenate([rest, self._rng.random(max(self._block, k))])
            self._pos = 0
        out = self._buf[self._pos:self._pos + k]
        self._pos += k
        return out


RngStream = Union[UniformStream, np.random.Generator]


# ------------------------------------------------------------
# Simulation
# ------------------------------------------------------------

def cascade_step(weights_in_order: Sequence[float] | np.ndarray, rng_stream: RngStream) -> CascadeFeedback:
    """Draw W ~ Bern(w) down the list and stop at the first click."""
    w = np.asarray(weights_in_order, dtype=float)
    k = int(w.size)
    u = rng_stream.take(k) if isinstance(rng_stream, UniformStream) else rng_stream.random(k)
    hits = np.flatnonzero(u < w)
    if hits.size:
        pos = int(hits[0]) + 1
        return CascadeFeedback(click_position=pos, observed_count=pos)
    return CascadeFeedback(click_position=None, observed_count=k)


class CascadeClickEnv:
    """
    Environment bound to a fixed weight vector (canonical order).
    Agents pass arms as tuples of item indices; the env looks the
    weights up and runs cascade_step on its own stream.
    """

    def __init__(self, weights: Sequence[float] | np.ndarray, stream: RngStream):
        self.weights = np.asarray(weights, dtype=float)
        self.stream = stream
        self.pulls = 0

    def pull(self, arm: Sequence[int]) -> CascadeFeedback:
        self.pulls += 1
        return cascade_step(self.weights[list(arm)], self.stream)

    def pull_semi_bandit(self, items: Sequence[int]) -> np.ndarray:
        """Reveal every pulled item's Bernoulli outcome (BatchRacing feedback)."""
        self.pulls += 1
        idx = list(items)
        u = self.stream.take(len(idx)) if isinstance(self.stream, UniformStream) else self.stream.random(len(idx))
        return (u < self.weights[idx]).astype(np.int64)


# ------------------------------------------------------------
# Exact observation-count computations
# ------------------------------------------------------------

def expected_observations(weights_in_order: Sequence[float] | np.ndarray) -> float:
    """
    E X = sum_{i<k} i * w_i * prod_{j<i}(1-w_j)  +  k * prod_{j<k}(1-w_j).
    """
    w = [float(x) for x in weights_in_order]
    k = len(w)
    total = 0.0
    survive = 1.0  # probability that no click happened before slot i
    for i in range(1, k):
        total += i * w[i - 1] * survive
        survive *= 1.0 - w[i - 1]
    return total + k * survive


def observation_distribution(weights_in_order: Sequence[float] | np.ndarray) -> list[tuple[int, float]]:
    """
    Atoms (j, P(X=j)) for j = 1..k.

    P(X=j) = w_j prod_{m<j}(1-w_m) for j<k, and the last slot collects
    every outcome that got that far: P(X=k) = prod_{m<k}(1-w_m).
    """
    w = [float(x) for x in weights_in_order]
    k = len(w)
    if k > ATOM_CAP:
        raise ArmTooLong(f"exact atoms are capped at {ATOM_CAP} slots, got {k}")
    atoms: list[tuple[int, float]] = []
    survive = 1.0
    for j in range(1, k):
        atoms.append((j, w[j - 1] * survive))
        survive *= 1.0 - w[j - 1]
    atoms.append((k, survive))
    return atoms


def observation_moment(weights_in_order: Sequence[float] | np.ndarray, power: int = 1) -> float:
    """E X^power from the k-atom distribution (power 1 or 2)."""
    if power not in (1, 2):
        raise ValueError(f"power must be 1 or 2, got {power}")
    return math.fsum(float(j) ** power * p for j, p in observation_distribution(weights_in_order))


def brute_force_observation_oracle(weights_in_order: Sequence[float] | np.ndarray, power: int = 1) -> float:
    """
    E X^power by enumerating all 2^k click vectors.

    Independent of the formulas above: every vector is weighted by its
    probability and X is read off as the first 1 (or k if none).
    """
    w = np.asarray(weights_in_order, dtype=float)
    k = int(w.size)
    if k > BRUTE_FORCE_CAP:
        raise ArmTooLong(f"brute force is capped at {BRUTE_FORCE_CAP} slots, got {k}")

    patterns = (np.arange(2 ** k)[:, None] >> np.arange(k)[None, :]) & 1
    probs = np.prod(np.where(patterns == 1, w[None, :], 1.0 - w[None, :]), axis=1)
    clicked = patterns.any(axis=1)
    first = np.where(clicked, patterns.argmax(axis=1) + 1, k)
    return float(np.sum(probs * first.astype(float) ** power))
