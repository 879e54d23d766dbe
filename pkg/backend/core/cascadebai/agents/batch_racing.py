# backend/core/cascadebai/agents/batch_racing.py
# ------------------------------------------------------------
# BatRac(b): semi-bandit racing baseline.
# - Each step pulls the b least-observed survivors and sees every
#   pulled item's outcome (no cascade censoring).
# - Radius, accept/reject tests and stopping rule are CascadeBAI's,
#   with epsilon fixed at 0, so only the feedback structure differs.
# - b = 1 and b = K give the two baselines of the semi-feedback study.
# ------------------------------------------------------------

from __future__ import annotations

import logging

import numpy as np

from ..errors import BadK, InvalidState
from ..integrations.click_model import RngStream, UniformStream
from ..models.instance import Instance, rho, validate
from ..settings import RadiusForm
from .cascade_bai import AlgState, RunConfig, RunResult, StopReason, _finish, _stream_for, check_invariants, eliminate
from .confidence import RadiusTable

logger = logging.getLogger(__name__)


class BatchRacingAgent:
    def __init__(self, instance: Instance, b: int, radius_form: RadiusForm = "main", lookahead: bool = True):
        self.instance = instance if instance.is_canonical else validate(instance)
        if not 1 <= int(b) <= self.instance.L:
            raise BadK(f"items per step must satisfy 1 <= b <= L={self.instance.L}, got {b}")
        self.b = int(b)
        self.lookahead = lookahead
        self.radius = RadiusTable(rho(self.instance.delta, self.instance.L), radius_form)
        self.state = AlgState.fresh(self.instance.L, self.instance.K)

    def step(self, rng_stream: RngStream) -> AlgState:
        st = self.state
        if st.stop_reason() is not None:
            raise InvalidState(f"step called after termination ({st.stop_reason().value}) at t={st.step}")

        D = st.survival
        pulled = D[np.argsort(st.obs_count[D], kind="stable")[: self.b]]
        n = pulled.size
        u = rng_stream.take(n) if isinstance(rng_stream, UniformStream) else rng_stream.random(n)
        st.clicks[pulled] += (u < self.instance.weights[pulled]).astype(np.int64)
        st.obs_count[pulled] += 1
        st.total_observations += n

        eliminate(st, self.radius, 0.0, self.lookahead)
        st.step += 1
        return st

    def run(self, max_steps: int, rng_stream: RngStream, check: bool = False) -> RunResult:
        st = self.state
        reason = st.stop_reason()
        while reason is None:
            if st.step >= max_steps:
                reason = StopReason.STEP_CAP_HIT
                logger.warning("BatRac(%d) hit the step cap (%d)", self.b, max_steps)
                break
            before = (len(st.accepted), len(st.rejected), st.survival.size)
            self.step(rng_stream)
            if check:
                check_invariants(st, before, uniform_counts=True)
            reason = st.stop_reason()
        return _finish(st, self.instance, reason)


def run_batch_racing(instance: Instance, b: int, config: RunConfig | None = None, rng: RngStream | None = None) -> RunResult:
    """Run BatRac(b); `config.ordering` is ignored (always least-observed first)."""
    config = config or RunConfig()
    agent = BatchRacingAgent(instance, b, config.radius_form, config.lookahead)
    return agent.run(config.max_steps, _stream_for(rng, config.seed), check=config.check_invariants)
