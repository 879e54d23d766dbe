# backend/core/cascadebai/harness/trials.py
# ------------------------------------------------------------
# Seeded trial batches.
# - Trial i gets its own seed derived from (master_seed, i), so a
#   record never depends on which worker ran it or in what order.
# - Trials fan out with joblib; records come back sorted by trial_id.
# - CSV schema is the TrialRecord field order, header included,
#   UTF-8 with LF line endings.
# ------------------------------------------------------------

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.stats import spearmanr

from ..errors import ConfigError
from ..integrations.click_model import RngSpec
from ..models.bounds import upper_bound_terms
from .config import AlgoSpec, InstanceSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrialRecord:
    trial_id: int
    seed: int
    algorithm: str
    ordering: str
    L: int
    K: int
    delta: float
    epsilon: float
    steps: int
    success: int
    total_observations: int
    stop_reason: str


CSV_COLUMNS: tuple[str, ...] = tuple(f.name for f in fields(TrialRecord))

GROUP_KEYS = ["algorithm", "ordering", "L", "K", "delta", "epsilon"]


def trial_seed(master_seed: int, trial_id: int) -> int:
    return RngSpec(master_seed, trial_id).seed()


def run_single_trial(instance_spec: InstanceSpec, algo_spec: AlgoSpec, master_seed: int, trial_id: int) -> TrialRecord:
    """Record of trial `trial_id`; a pure function of its arguments."""
    instance = instance_spec.build()
    spec = RngSpec(master_seed, trial_id)
    result = algo_spec.run(instance, spec.stream())
    return TrialRecord(
        trial_id=int(trial_id),
        seed=spec.seed(),
        algorithm=algo_spec.label(instance.K),
        ordering=algo_spec.ordering_label,
        L=instance.L,
        K=instance.K,
        delta=instance.delta,
        epsilon=instance.epsilon,
        steps=result.steps,
        success=int(result.success),
        total_observations=result.total_observations,
        stop_reason=result.stop_reason.value,
    )


def run_trials(
    instance_spec: InstanceSpec,
    algo_spec: AlgoSpec,
    n_trials: int,
    master_seed: int,
    parallelism: int = 1,
) -> list[TrialRecord]:
    if n_trials < 1:
        raise ConfigError(f"n_trials must be at least 1, got {n_trials}")
    instance = instance_spec.build()  # validation errors surface here, before any worker starts

    logger.info(
        "running %d trials of %s on L=%d K=%d delta=%g eps=%g (jobs=%d)",
        n_trials, algo_spec.label(instance.K), instance.L, instance.K, instance.delta, instance.epsilon, parallelism,
    )
    if parallelism == 1:
        records = [run_single_trial(instance_spec, algo_spec, master_seed, i) for i in range(n_trials)]
    else:
        records = Parallel(n_jobs=parallelism)(
            delayed(run_single_trial)(instance_spec, algo_spec, master_seed, i) for i in range(n_trials)
        )
    records = sorted(records, key=lambda r: r.trial_id)

    capped = sum(r.stop_reason == "StepCapHit" for r in records)
    if capped:
        logger.warning("%d of %d trials hit the step cap", capped, n_trials)
    logger.info("finished %d trials: mean steps %.1f", n_trials, float(np.mean([r.steps for r in records])))
    return records


# ============================================================
# Tables
# ============================================================

def records_frame(records: Iterable[TrialRecord]) -> pd.DataFrame:
    return pd.DataFrame([asdict(r) for r in records], columns=list(CSV_COLUMNS))


def write_csv(records: Iterable[TrialRecord] | pd.DataFrame, out: str | Path | IO[str]) -> None:
    frame = records if isinstance(records, pd.DataFrame) else records_frame(records)
    if isinstance(out, (str, Path)):
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(out, index=False, lineterminator="\n", encoding="utf-8")
    else:
        frame.to_csv(out, index=False, lineterminator="\n")


def read_csv(path: str | Path) -> list[TrialRecord]:
    frame = pd.read_csv(path)
    missing = [c for c in CSV_COLUMNS if c not in frame.columns]
    if missing:
        raise ConfigError(f"{path} is missing trial columns: {', '.join(missing)}")
    return [TrialRecord(**row) for row in frame[list(CSV_COLUMNS)].to_dict(orient="records")]


def summarize(records: Iterable[TrialRecord] | pd.DataFrame) -> pd.DataFrame:
    """
    Mean/std/min/max steps, success rate and std/mean per configuration.
    std is the sample standard deviation (0 for a single trial).
    """
    frame = records if isinstance(records, pd.DataFrame) else records_frame(records)
    g = frame.groupby(GROUP_KEYS, sort=True)
    out = g.agg(
        n_trials=("steps", "size"),
        mean_steps=("steps", "mean"),
        std_steps=("steps", "std"),
        min_steps=("steps", "min"),
        max_steps=("steps", "max"),
        success_rate=("success", "mean"),
        mean_observations=("total_observations", "mean"),
        capped=("stop_reason", lambda s: int((s == "StepCapHit").sum())),
    ).reset_index()
    out["std_steps"] = out["std_steps"].fillna(0.0)
    out["cv_steps"] = out["std_steps"] / out["mean_steps"].where(out["mean_steps"] > 0)
    return out


# ============================================================
# Gap sweep
# ============================================================

def gap_sweep(
    w_star: float,
    w_primes: Sequence[float],
    K: int,
    L: int,
    n_trials: int,
    master_seed: int,
    algo_spec: AlgoSpec | None = None,
    delta: float = 0.1,
    parallelism: int = 1,
) -> pd.DataFrame:
    """
    Mean steps and the analytic bound for two-probability instances
    with a shared w* and each w' in `w_primes`.
    """
    algo_spec = algo_spec or AlgoSpec()
    rows = []
    for w_prime in w_primes:
        spec = InstanceSpec(K=K, L=L, two_prob=(w_star, float(w_prime)), delta=delta)
        report = upper_bound_terms(spec.build())
        records = run_trials(spec, algo_spec, n_trials, master_seed, parallelism)
        rows.append({
            "w_prime": float(w_prime),
            "gap": w_star - float(w_prime),
            "mean_steps": float(np.mean([r.steps for r in records])),
            "bound_total": report.total,
            "lower_bound": report.lower_bound,
        })
    return pd.DataFrame(rows)


def monotonicity_check(sweep: pd.DataFrame) -> tuple[float, float]:
    """
    Spearman correlation of (-gap) with mean steps and with the bound.
    Both should be close to +1: smaller gaps, longer runs.
    """
    steps_corr = spearmanr(-sweep["gap"], sweep["mean_steps"])[0]
    bound_corr = spearmanr(-sweep["gap"], sweep["bound_total"])[0]
    return float(steps_corr), float(bound_corr)
