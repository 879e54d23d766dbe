# backend/core/cascadebai/agents/cascade_bai.py
# ------------------------------------------------------------
# CascadeBAI(epsilon, delta, K): fixed-confidence top-K identification
# under cascading feedback.
# - AlgState holds the survival / accept / reject partition plus the
#   per-item counts. Items move out of D and never come back.
# - Each step pulls the min(K, |D|) least-observed survivors, pads
#   the list with identified items if |D| < K, and updates counts for
#   the survivors the user actually looked at.
# - An item is accepted once its LCB clears the UCB of the (k_t+1)-th
#   best survivor (minus epsilon); rejected once its UCB falls under
#   the LCB of the k_t-th best survivor (minus epsilon).
#
# Example:
#   inst = make_instance(linspace_weights(0.9, 0.15, 16), K=4)
#   res = run_cascade_bai(inst, RunConfig(seed=3))
#   res.recommended, res.steps, res.success
# ------------------------------------------------------------

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..coordinators.ordering import OrderingCoordinator
from ..errors import InvalidState
from ..integrations.click_model import RngStream, UniformStream, cascade_step
from ..models.instance import Instance, rho, validate
from ..settings import DEFAULT_MAX_STEPS, RadiusForm
from .confidence import RadiusTable

logger = logging.getLogger(__name__)


class StopReason(str, Enum):
    SURVIVAL_EMPTY = "SurvivalEmpty"
    ACCEPT_FULL = "AcceptFull"
    REJECT_FULL = "RejectFull"
    STEP_CAP_HIT = "StepCapHit"


@dataclass
class AlgState:
    """
    Mutable state of one racing run.

    `accepted` and `rejected` keep insertion order. Empirical means are
    derived from integer click counts so mean * count is always a count.
    """
    L: int
    K: int
    in_survival: np.ndarray
    obs_count: np.ndarray
    clicks: np.ndarray
    accepted: list[int] = field(default_factory=list)
    rejected: list[int] = field(default_factory=list)
    step: int = 0
    total_observations: int = 0
    _survivors: np.ndarray | None = field(default=None, repr=False)
    # checks before step `quiet_until` cannot fire (see eliminate)
    quiet_until: int = field(default=0, repr=False)
    lookahead: int = field(default=0, repr=False)
    lookahead_retry: int = field(default=0, repr=False)

    @classmethod
    def fresh(cls, L: int, K: int) -> "AlgState":
        return cls(
            L=int(L),
            K=int(K),
            in_survival=np.ones(L, dtype=bool),
            obs_count=np.zeros(L, dtype=np.int64),
            clicks=np.zeros(L, dtype=np.int64),
        )

    @property
    def survival(self) -> np.ndarray:
        """Survivors as ascending item indices."""
        if self._survivors is None:
            self._survivors = np.flatnonzero(self.in_survival)
        return self._survivors

    @property
    def emp_mean(self) -> np.ndarray:
        return np.divide(
            self.clicks, self.obs_count,
            out=np.zeros(self.L, dtype=float), where=self.obs_count > 0,
        )

    @property
    def k_t(self) -> int:
        return self.K - len(self.accepted)

    def identified(self) -> np.ndarray:
        return np.flatnonzero(~self.in_survival)

    def stop_reason(self) -> StopReason | None:
        """Reason the racing loop would stop now, or None if it continues."""
        if len(self.accepted) >= self.K:
            return StopReason.ACCEPT_FULL
        if len(self.rejected) >= self.L - self.K:
            return StopReason.REJECT_FULL
        if not self.in_survival.any():
            return StopReason.SURVIVAL_EMPTY
        return None

    def move(self, accept: np.ndarray, reject: np.ndarray) -> None:
        if accept.size == 0 and reject.size == 0:
            return
        self.accepted.extend(int(i) for i in np.sort(accept))
        self.rejected.extend(int(i) for i in np.sort(reject))
        self.in_survival[accept] = False
        self.in_survival[reject] = False
        self._survivors = None
        self.quiet_until = 0


@dataclass
class RunResult:
    recommended: tuple[int, ...]
    steps: int
    success: bool
    total_observations: int
    per_item_obs: np.ndarray
    stop_reason: StopReason
    accepted: tuple[int, ...] = ()
    rejected: tuple[int, ...] = ()


@dataclass(frozen=True)
class RunConfig:
    """
    Knobs of a single run. `seed` is used only when no stream is passed
    to the run function.
    """
    ordering: str = "tcount"
    max_steps: int = DEFAULT_MAX_STEPS
    seed: int | None = None
    radius_form: RadiusForm = "main"
    check_invariants: bool = False
    lookahead: bool = True


# ------------------------------------------------------------
# Racing machinery shared with BatchRacing
# ------------------------------------------------------------

LOOKAHEAD_MIN = 16
LOOKAHEAD_SLACK = 1e-9

_EMPTY = np.empty(0, dtype=np.int64)
_EMPTY.setflags(write=False)


def _quiet_for(T: np.ndarray, clicks: np.ndarray, k_t: int, radius: RadiusTable, epsilon: float, s: int) -> bool:
    """
    True when no accept or reject test can fire during the next s steps.

    A survivor gains at most one observation per step, so after u <= s
    steps its mean lies in [c/(T+s), (c+s)/(T+s)] and its radius in
    [C(T+s), C(T)] (C is decreasing from T = 2). Order statistics of
    the means are bounded by the same order statistics of the bounds.
    """
    n = T.size
    Ts = T + s
    lo = clicks / Ts
    hi = (clicks + s) / Ts
    r = radius(Ts)
    r_far = float(r.min())
    q_lo = np.partition(lo, n - k_t - 1)[n - k_t - 1]  # floor of the (k_t+1)-th largest mean
    q_hi = np.partition(hi, n - k_t)[n - k_t]          # ceiling of the k_t-th largest mean
    if float((hi - r).max()) >= q_lo + r_far - epsilon - LOOKAHEAD_SLACK:
        return False
    return float((lo + r).min()) > q_hi - r_far - epsilon + LOOKAHEAD_SLACK


def _plan_quiet_steps(state: AlgState, radius: RadiusTable, epsilon: float, T: np.ndarray, clicks: np.ndarray) -> None:
    if state.step < state.lookahead_retry:
        return
    s = min(max(2 * state.lookahead, LOOKAHEAD_MIN), int(T.min()) // 2)
    while s >= LOOKAHEAD_MIN:
        if _quiet_for(T, clicks, state.k_t, radius, epsilon, s):
            state.lookahead = s
            state.quiet_until = state.step + s + 1
            return
        s //= 4
    state.lookahead = 0
    state.lookahead_retry = state.step + LOOKAHEAD_MIN


def eliminate(
    state: AlgState, radius: RadiusTable, epsilon: float, lookahead: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Apply the accept/reject tests to the current survivors and move
    the winners and losers out of D. Returns (accepted, rejected).

    No test fires while some survivor is unobserved: its radius is +inf.
    With `lookahead`, a check that fires nothing also works out how many
    of the following checks are certain to fire nothing and skips them;
    the run is identical either way.
    """
    if state.step < state.quiet_until:
        return _EMPTY, _EMPTY
    D = state.survival
    T = state.obs_count[D]
    if T.min() == 0:
        return _EMPTY, _EMPTY

    k_t = state.k_t
    clicks = state.clicks[D]
    means = clicks / T
    r = radius(T)
    ucb = means + r
    lcb = means - r

    # descending empirical mean, smaller index first on ties
    rank = np.argsort(-means, kind="stable")
    j_star = rank[k_t]       # (k_t+1)-th largest
    j_prime = rank[k_t - 1]  # k_t-th largest

    acc_mask = lcb > ucb[j_star] - epsilon
    rej_mask = (ucb < lcb[j_prime] - epsilon) & ~acc_mask
    accept, reject = D[acc_mask], D[rej_mask]
    if accept.size or reject.size:
        state.move(accept, reject)
        if logger.isEnabledFor(logging.DEBUG):
            logger.debug("step %d: accept %s reject %s", state.step, accept.tolist(), reject.tolist())
    elif lookahead and T.min() >= 2 * LOOKAHEAD_MIN:
        _plan_quiet_steps(state, radius, epsilon, T, clicks)
    return accept, reject


def recommend(state: AlgState) -> tuple[int, ...]:
    """
    First K accepted items when |A| >= K. Otherwise A followed by the
    survivors and then the rejected items, each group by empirical mean
    descending (smaller index on ties), cut to K.
    """
    K = state.K
    if len(state.accepted) >= K:
        return tuple(state.accepted[:K])

    means = state.emp_mean

    def by_mean(items: np.ndarray) -> np.ndarray:
        return items[np.lexsort((items, -means[items]))]

    rest = np.concatenate([by_mean(state.survival), by_mean(np.asarray(state.rejected, dtype=np.int64))])
    need = K - len(state.accepted)
    return tuple(state.accepted) + tuple(int(i) for i in rest[:need])


def check_invariants(
    state: AlgState, previous: tuple[int, int, int] | None = None, uniform_counts: bool = False,
) -> None:
    """
    Partition, monotone growth and count consistency. `previous` is
    (|A|, |R|, |D|) from before the step. With `uniform_counts` (least
    observed first), survivor counts must stay within one of each other.
    """
    A, R = state.accepted, state.rejected
    D = state.survival
    union = np.concatenate([np.asarray(A, dtype=np.int64), np.asarray(R, dtype=np.int64), D])
    if union.size != state.L or np.unique(union).size != state.L:
        raise InvalidState(f"step {state.step}: D, A, R do not partition the {state.L} items")
    if previous is not None:
        a, r, d = previous
        if len(A) < a or len(R) < r or D.size > d:
            raise InvalidState(f"step {state.step}: partition moved backwards")
    if np.any(state.clicks > state.obs_count) or np.any(state.clicks < 0):
        raise InvalidState(f"step {state.step}: click counts exceed observation counts")
    if uniform_counts and D.size:
        T = state.obs_count[D]
        if T.max() - T.min() > 1:
            raise InvalidState(f"step {state.step}: survivor counts spread {T.min()}..{T.max()}")


def _stream_for(rng: RngStream | None, seed: int | None) -> RngStream:
    if rng is not None:
        return rng
    return UniformStream(np.random.default_rng(seed))


def _finish(state: AlgState, instance: Instance, reason: StopReason) -> RunResult:
    if reason is StopReason.STEP_CAP_HIT:
        rec = tuple(state.accepted[: state.K])
        success = False
    else:
        rec = recommend(state)
        success = len(rec) == state.K and set(rec) <= instance.optimal_items()
    return RunResult(
        recommended=rec,
        steps=state.step,
        success=bool(success),
        total_observations=state.total_observations,
        per_item_obs=state.obs_count.copy(),
        stop_reason=reason,
        accepted=tuple(state.accepted),
        rejected=tuple(state.rejected),
    )


# ------------------------------------------------------------
# Agent
# ------------------------------------------------------------

class CascadeBAIAgent:
    """
    One CascadeBAI run on a canonical instance.

    The agent owns the state, the radius table and the ordering
    coordinator; the click stream is passed in per step.
    """

    def __init__(
        self,
        instance: Instance,
        ordering: str | OrderingCoordinator = "tcount",
        radius_form: RadiusForm = "main",
        lookahead: bool = True,
    ):
        self.instance = instance if instance.is_canonical else validate(instance)
        self.coordinator = ordering if isinstance(ordering, OrderingCoordinator) else OrderingCoordinator(ordering)
        self.radius = RadiusTable(rho(self.instance.delta, self.instance.L), radius_form)
        self.lookahead = lookahead
        self.state = AlgState.fresh(self.instance.L, self.instance.K)

    def select(self) -> tuple[np.ndarray, int]:
        """Arm for the next step and how many of its slots are survivors."""
        st = self.state
        D = st.survival
        counts = st.obs_count[D]
        radii = self.radius(counts) if self.coordinator.needs_bounds else None
        ordered = self.coordinator.order(D, counts, st.clicks[D] / np.maximum(counts, 1), radii)
        k_hat = min(st.K, D.size)
        arm = ordered[:k_hat]
        if k_hat < st.K:
            arm = np.concatenate([arm, st.identified()[: st.K - k_hat]])
        return arm, k_hat

    def step(self, rng_stream: RngStream) -> AlgState:
        st = self.state
        if st.stop_reason() is not None:
            raise InvalidState(f"step called after termination ({st.stop_reason().value}) at t={st.step}")

        arm, k_hat = self.select()
        fb = cascade_step(self.instance.weights[arm], rng_stream)
        st.total_observations += fb.observed_count

        # padded slots are observed but never counted
        seen = arm[: min(fb.observed_count, k_hat)]
        st.obs_count[seen] += 1
        if fb.click_position is not None and fb.click_position <= k_hat:
            st.clicks[arm[fb.click_position - 1]] += 1

        eliminate(st, self.radius, self.instance.epsilon, self.lookahead)
        st.step += 1
        return st

    def run(self, max_steps: int, rng_stream: RngStream, check: bool = False) -> RunResult:
        st = self.state
        reason = st.stop_reason()
        while reason is None:
            if st.step >= max_steps:
                reason = StopReason.STEP_CAP_HIT
                logger.warning(
                    "CascadeBAI hit the step cap (%d) with |A|=%d |R|=%d", max_steps, len(st.accepted), len(st.rejected),
                )
                break
            before = (len(st.accepted), len(st.rejected), st.survival.size)
            self.step(rng_stream)
            if check:
                check_invariants(st, before, uniform_counts=self.coordinator.name == "tcount")
            reason = st.stop_reason()
        return _finish(st, self.instance, reason)


# ------------------------------------------------------------
# Functional entry points
# ------------------------------------------------------------

def cascade_bai_step(
    state: AlgState,
    instance: Instance,
    ordering_policy: str | OrderingCoordinator,
    rng_stream: RngStream,
    radius_form: RadiusForm = "main",
) -> AlgState:
    """Run one racing iteration on `state` (updated in place and returned)."""
    agent = CascadeBAIAgent(instance, ordering_policy, radius_form)
    if (state.L, state.K) != (agent.instance.L, agent.instance.K):
        raise InvalidState(f"state is for L={state.L}, K={state.K}; instance has L={agent.instance.L}, K={agent.instance.K}")
    agent.state = state
    return agent.step(rng_stream)


def run_cascade_bai(instance: Instance, config: RunConfig | None = None, rng: RngStream | None = None) -> RunResult:
    """Run CascadeBAI to termination or to the step cap."""
    config = config or RunConfig()
    agent = CascadeBAIAgent(instance, config.ordering, config.radius_form, config.lookahead)
    return agent.run(config.max_steps, _stream_for(rng, config.seed), check=config.check_invariants)
