# backend/core/cascadebai/harness/experiments.py
# ------------------------------------------------------------
# The three simulation studies, at desk or full scale.
# - ordering:     all seven within-arm orderings on two-probability
#                 instances (full scale adds the eps = 0.05 and
#                 delta = 0.05 grids).
# - semifeedback: CascadeBAI vs BatRac(1) vs BatRac(K) over a K sweep
#                 for the small- and large-probability families.
# - kscaling:     CascadeBAI over a K sweep for every registry family,
#                 then a c1 K^p + c2 fit per family.
# Every study returns tables; run_experiment() also writes them as CSV.
# ------------------------------------------------------------

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import pandas as pd

from ..coordinators.ordering import ORDERINGS
from ..errors import BadGrid, ConfigError, DegeneratePoints
from ..models.bounds import upper_bound_terms
from ..settings import DEFAULT_MASTER_SEED, DEFAULT_MAX_STEPS, RadiusForm
from .config import AlgoSpec, InstanceSpec, load_families, load_registry
from .fitting import FitResult, fit_scaling
from .trials import TrialRecord, records_frame, run_trials, summarize

logger = logging.getLogger(__name__)

EXPERIMENTS = ("ordering", "semifeedback", "kscaling")
SEMIFEEDBACK_ALGORITHMS = ("cascade", "batrac1", "batracK")
SCALES = ("desk", "full")
SCALE_ALIASES = {"paper": "full"}


@dataclass(frozen=True)
class ExperimentConfig:
    """
    One study's grid. `settings` lists the (delta, epsilon) pairs and
    `instances` the (w*, w') pairs of the ordering study; the K-sweep
    studies read their weights from `families`.
    """
    name: str
    scale: str = "desk"
    L: int = 64
    k_grid: tuple[int, ...] = (8, 12, 16, 20, 24)
    n_trials: int = 20
    settings: tuple[tuple[float, float], ...] = ((0.1, 0.0),)
    instances: tuple[tuple[float, float], ...] = ((0.6, 0.3),)
    families: tuple[str, ...] = ()
    algorithms: tuple[str, ...] = SEMIFEEDBACK_ALGORITHMS
    orderings: tuple[str, ...] = ORDERINGS
    master_seed: int = DEFAULT_MASTER_SEED
    n_jobs: int = 1
    max_steps: int = DEFAULT_MAX_STEPS
    radius_form: RadiusForm = "main"

    def __post_init__(self) -> None:
        if self.name not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {', '.join(EXPERIMENTS)}, got {self.name!r}")
        object.__setattr__(self, "scale", SCALE_ALIASES.get(self.scale, self.scale))
        if self.scale not in SCALES:
            raise ConfigError(f"scale must be one of {', '.join(SCALES + tuple(SCALE_ALIASES))}, got {self.scale!r}")
        for algo in self.algorithms:
            if algo not in SEMIFEEDBACK_ALGORITHMS:
                raise ConfigError(f"unknown algorithm {algo!r}; pick from {', '.join(SEMIFEEDBACK_ALGORITHMS)}")

    def check_grid(self) -> None:
        if not self.k_grid:
            raise BadGrid(f"{self.name}: K grid is empty")
        bad = [K for K in self.k_grid if not 1 <= int(K) < self.L]
        if bad:
            raise BadGrid(f"{self.name}: K values {bad} are outside [1, L={self.L})")
        if self.name == "ordering" and (not self.instances or not self.settings or not self.orderings):
            raise BadGrid("ordering: need at least one instance, setting and ordering")


def preset(name: str, scale: str = "desk", **overrides: Any) -> ExperimentConfig:
    """Default grid of a study. Keyword overrides replace single fields."""
    scale = SCALE_ALIASES.get(scale, scale)
    registry = load_registry()
    if name == "ordering":
        if scale == "full":
            base = ExperimentConfig(
                name, scale, L=64, k_grid=(16,),
                settings=((0.1, 0.0), (0.1, 0.05), (0.05, 0.0)),
                instances=((0.2, 0.1), (0.5, 0.4), (0.8, 0.6)),
            )
        else:
            base = ExperimentConfig(name, scale, L=32, k_grid=(8,), instances=((0.6, 0.3),))
    elif name == "semifeedback":
        fams = tuple(registry.get("semifeedback", ()))
        if scale == "full":
            base = ExperimentConfig(name, scale, L=128, k_grid=tuple(range(20, 61, 10)), families=fams)
        else:
            base = ExperimentConfig(name, scale, L=32, k_grid=(8, 12, 16), families=fams)
    elif name == "kscaling":
        fams = tuple(registry.get("kscaling", ()))
        if scale == "full":
            base = ExperimentConfig(name, scale, L=128, k_grid=tuple(range(20, 61, 10)), families=fams)
        else:
            base = ExperimentConfig(name, scale, L=64, k_grid=(8, 12, 16, 20, 24), families=fams)
    else:
        raise ConfigError(f"experiment must be one of {', '.join(EXPERIMENTS)}, got {name!r}")
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return replace(base, **overrides) if overrides else base


def _algo_spec(config: ExperimentConfig, algo: str = "cascade", ordering: str = "tcount") -> AlgoSpec:
    if algo == "cascade":
        return AlgoSpec("cascade", ordering=ordering, max_steps=config.max_steps, radius_form=config.radius_form)
    b = 1 if algo == "batrac1" else None
    return AlgoSpec("batrac", b=b, max_steps=config.max_steps, radius_form=config.radius_form)


def _run(config: ExperimentConfig, spec: InstanceSpec, algo: AlgoSpec) -> list[TrialRecord]:
    return run_trials(spec, algo, config.n_trials, config.master_seed, config.n_jobs)


# ============================================================
# Studies
# ============================================================

@dataclass
class ExperimentResult:
    name: str
    trials: pd.DataFrame
    summary: pd.DataFrame
    fits: dict[str, FitResult] = field(default_factory=dict)
    refused: dict[str, DegeneratePoints] = field(default_factory=dict)

    def fits_frame(self) -> pd.DataFrame:
        rows = [{"family": fam, **fit.as_row()} for fam, fit in self.fits.items()]
        return pd.DataFrame(rows, columns=["family", "model", "c1", "c2", "r_squared", "n_points"])


def experiment_ordering(config: ExperimentConfig) -> ExperimentResult:
    """Mean/std steps of every ordering on every (instance, delta, eps, K)."""
    config.check_grid()
    frames, summaries = [], []
    for w_star, w_prime in config.instances:
        for delta, eps in config.settings:
            for K in config.k_grid:
                spec = InstanceSpec(K=K, L=config.L, two_prob=(w_star, w_prime), delta=delta, epsilon=eps)
                records = []
                for ordering in config.orderings:
                    records.extend(_run(config, spec, _algo_spec(config, "cascade", ordering)))
                trials = records_frame(records).assign(w_star=w_star, w_prime=w_prime)
                frames.append(trials)
                summaries.append(summarize(records).assign(w_star=w_star, w_prime=w_prime))
    return ExperimentResult("ordering", pd.concat(frames, ignore_index=True), pd.concat(summaries, ignore_index=True))


def experiment_semifeedback(config: ExperimentConfig) -> ExperimentResult:
    """Per-K mean steps of CascadeBAI, BatRac(1) and BatRac(K) on each family."""
    config.check_grid()
    families = load_families()
    frames, summaries = [], []
    for fam_name in config.families:
        family = families[fam_name]
        for K in config.k_grid:
            spec = family.instance_spec(K, config.L, delta=config.settings[0][0], epsilon=0.0)
            records = []
            for algo in config.algorithms:
                records.extend(_run(config, spec, _algo_spec(config, algo)))
            frames.append(records_frame(records).assign(family=fam_name))
            summaries.append(summarize(records).assign(family=fam_name))
    return ExperimentResult("semifeedback", pd.concat(frames, ignore_index=True), pd.concat(summaries, ignore_index=True))


def experiment_kscaling(config: ExperimentConfig) -> ExperimentResult:
    """
    CascadeBAI over the K grid for each family, the bound terms next to
    the empirical means, and one scaling fit per family. A family whose
    points cannot support a fit ends up in `refused`.
    """
    config.check_grid()
    families = load_families()
    delta = config.settings[0][0]
    frames, summaries = [], []
    fits: dict[str, FitResult] = {}
    refused: dict[str, DegeneratePoints] = {}

    for fam_name in config.families:
        family = families[fam_name]
        fam_rows = []
        for K in config.k_grid:
            spec = family.instance_spec(K, config.L, delta=delta, epsilon=0.0)
            records = _run(config, spec, _algo_spec(config))
            report = upper_bound_terms(spec.build())
            frames.append(records_frame(records).assign(family=fam_name))
            fam_rows.append(summarize(records).assign(
                family=fam_name, bound_total=report.total, lower_bound=report.lower_bound,
            ))
        fam_summary = pd.concat(fam_rows, ignore_index=True)
        summaries.append(fam_summary)
        # a capped mean is a truncated mean; it never feeds the fit
        capped = fam_summary["capped"] > 0
        if capped.any():
            logger.warning(
                "family %s: K=%s hit the step cap (%d) and are left out of the fit",
                fam_name, [int(k) for k in fam_summary.loc[capped, "K"]], config.max_steps,
            )
        usable = fam_summary.loc[~capped]
        try:
            fits[fam_name] = fit_scaling(zip(usable["K"], usable["mean_steps"]), family.model)
        except DegeneratePoints as exc:
            logger.warning("family %s: fit refused (%s)", fam_name, exc)
            refused[fam_name] = exc

    return ExperimentResult(
        "kscaling", pd.concat(frames, ignore_index=True), pd.concat(summaries, ignore_index=True), fits, refused,
    )


STUDIES = {
    "ordering": experiment_ordering,
    "semifeedback": experiment_semifeedback,
    "kscaling": experiment_kscaling,
}


def run_experiment(config: ExperimentConfig, out_dir: str | Path | None = None) -> ExperimentResult:
    """Run one study; with `out_dir`, write <name>_<scale>_{trials,summary[,fits]}.csv there."""
    logger.info("experiment %s at %s scale: L=%d K=%s", config.name, config.scale, config.L, list(config.k_grid))
    result = STUDIES[config.name](config)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = f"{config.name}_{config.scale}"
        result.trials.to_csv(out / f"{stem}_trials.csv", index=False, lineterminator="\n")
        result.summary.to_csv(out / f"{stem}_summary.csv", index=False, lineterminator="\n")
        if config.name == "kscaling":
            result.fits_frame().to_csv(out / f"{stem}_fits.csv", index=False, lineterminator="\n")
        logger.info("wrote %s tables to %s", stem, out)
    return result
