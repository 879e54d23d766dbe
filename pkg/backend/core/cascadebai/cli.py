# backend/core/cascadebai/cli.py
# ------------------------------------------------------------
# Command line entry point (console script "cascadebai").
#
#   cascadebai run        --linspace 0.9,0.15 --L 16 --K 4 --seed 7
#   cascadebai trials     --two-prob 0.6,0.3 --L 32 --K 8 --n 20 --jobs 4 --out t.csv
#   cascadebai bounds     --weights 0.9,0.5,0.3 --K 1 --eps 0.25
#   cascadebai experiment --name kscaling --scale desk --out results/
#   cascadebai fit        --model linear --in summary.csv
#
# Every subcommand accepts --config file.json (keys mirror the flags).
# Flags beat the file, the file beats CASCADEBAI_* env defaults.
# Package errors exit with status 2 and a one-line message on stderr.
# ------------------------------------------------------------

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import pandas as pd

from .agents.cascade_bai import RunResult
from .coordinators.ordering import ORDERINGS
from .errors import CascadeBAIError, ConfigError
from .harness.config import AlgoSpec, InstanceSpec, load_config_file, merge_options
from .harness.experiments import EXPERIMENTS, SCALE_ALIASES, SCALES, SEMIFEEDBACK_ALGORITHMS, preset, run_experiment
from .harness.fitting import fit_scaling
from .harness.reports import bounds_report, format_report
from .harness.trials import run_trials, summarize, write_csv
from .integrations.click_model import UniformStream
from .logging_config import configure_logging
from .settings import Settings


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


# ============================================================
# Parser
# ============================================================

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON file whose keys mirror these flags")
    p.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING ...")


def _add_instance(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--weights", type=_floats, help="click probabilities, e.g. 0.9,0.5,0.3")
    src.add_argument("--two-prob", dest="two_prob", type=_floats, help="w_star,w_prime (needs --L)")
    src.add_argument("--linspace", type=_floats, help="w_max,w_min evenly spaced (needs --L)")
    p.add_argument("--L", type=int, help="number of items for --two-prob / --linspace")
    p.add_argument("--K", type=int, help="arm size")
    p.add_argument("--delta", type=float, help="risk level (default 0.1)")
    p.add_argument("--eps", type=float, help="tolerance epsilon (default 0)")


def _add_algo(p: argparse.ArgumentParser) -> None:
    p.add_argument("--algo", choices=["cascade", "batrac"], help="CascadeBAI or BatRac(b)")
    p.add_argument("--b", type=int, help="items per step for batrac (default K)")
    p.add_argument("--order", choices=list(ORDERINGS), help="within-arm ordering for cascade")
    p.add_argument("--max-steps", dest="max_steps", type=int, help="step cap per run")
    p.add_argument("--radius-form", dest="radius_form", choices=["main", "appendix"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cascadebai",
        description="Top-K identification under cascading feedback: runs, trial batches, bounds and studies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="one seeded run")
    _add_common(p)
    _add_instance(p)
    _add_algo(p)
    p.add_argument("--seed", type=int, help="seed of the click stream")

    p = sub.add_parser("trials", help="seeded trial batch to CSV")
    _add_common(p)
    _add_instance(p)
    _add_algo(p)
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--n", type=int, help="number of trials")
    p.add_argument("--jobs", type=int, help="parallel workers")
    p.add_argument("--out", type=Path, help="CSV path (stdout if omitted)")

    p = sub.add_parser("bounds", help="analytic bound report")
    _add_common(p)
    _add_instance(p)
    p.add_argument("--format", dest="fmt", choices=["text", "json"])

    p = sub.add_parser("experiment", help="reproduce a simulation study")
    _add_common(p)
    p.add_argument("--name", choices=list(EXPERIMENTS))
    p.add_argument("--scale", choices=[*SCALES, *SCALE_ALIASES], help="desk (default) or full; paper is an alias of full")
    p.add_argument("--k-grid", dest="k_grid", type=_ints, help="override the K grid, e.g. 8,12,16")
    p.add_argument("--L", type=int, help="override the number of items")
    p.add_argument("--n", type=int, help="trials per configuration")
    p.add_argument("--jobs", type=int, help="parallel workers")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--max-steps", dest="max_steps", type=int)
    p.add_argument("--algorithms", type=lambda s: tuple(x for x in s.split(",") if x),
                   help=f"semifeedback subset of {','.join(SEMIFEEDBACK_ALGORITHMS)}")
    p.add_argument("--out", type=Path, help="output directory (default CASCADEBAI_OUTPUT_DIR)")

    p = sub.add_parser("fit", help="fit c1 K^p + c2 to (K, mean_steps) points")
    _add_common(p)
    p.add_argument("--model", choices=["linear", "quadratic", "LinearInK", "QuadraticInK"])
    p.add_argument("--in", dest="input", type=Path, help="CSV with K,mean_steps (or a trials CSV)")
    p.add_argument("--out", type=Path, help="write the fit as JSON here")
    return parser


# ============================================================
# Option resolution
# ============================================================

def _resolve(args: argparse.Namespace, settings: Settings) -> dict[str, Any]:
    flags = {k: v for k, v in vars(args).items() if k not in ("config", "command")}
    file_values = load_config_file(args.config) if args.config else {}
    if file_values.get("in") is not None:
        file_values["input"] = Path(file_values.pop("in"))
    if file_values.get("format") is not None:
        file_values["fmt"] = file_values.pop("format")
    defaults = {
        "max_steps": settings.max_steps,
        "seed": settings.master_seed,
        "n": settings.n_trials,
        "jobs": settings.n_jobs,
        "radius_form": settings.radius_form,
        "log_level": settings.log_level,
        "algo": "cascade",
        "order": "tcount",
        "delta": 0.1,
        "eps": 0.0,
    }
    return merge_options(flags, file_values, defaults)


def _instance_spec(opts: dict[str, Any]) -> InstanceSpec:
    return InstanceSpec.from_mapping(opts)


def _algo_spec(opts: dict[str, Any]) -> AlgoSpec:
    return AlgoSpec(
        algo=opts["algo"],
        b=opts.get("b"),
        ordering=opts["order"],
        max_steps=int(opts["max_steps"]),
        radius_form=opts["radius_form"],
    )


def _result_dict(result: RunResult, user_indices: list[int]) -> dict[str, Any]:
    return {
        "recommended": user_indices,
        "steps": result.steps,
        "success": result.success,
        "total_observations": result.total_observations,
        "stop_reason": result.stop_reason.value,
        "per_item_obs": result.per_item_obs.tolist(),
    }


# ============================================================
# Subcommands
# ============================================================

def cmd_run(opts: dict[str, Any]) -> int:
    spec = _instance_spec(opts)
    algo = _algo_spec(opts)
    instance = spec.build()
    seed = opts.get("seed")
    result = algo.run(instance, UniformStream(np.random.default_rng(seed)))
    payload = _result_dict(result, instance.to_user_indices(result.recommended))
    print(json.dumps({"algorithm": algo.label(instance.K), **payload}, indent=2))
    return 0


def cmd_trials(opts: dict[str, Any]) -> int:
    spec = _instance_spec(opts)
    records = run_trials(spec, _algo_spec(opts), int(opts["n"]), int(opts["seed"]), int(opts["jobs"]))
    out = opts.get("out")
    if out:
        write_csv(records, out)
        print(summarize(records).to_string(index=False))
    else:
        write_csv(records, sys.stdout)
    return 0


def cmd_bounds(opts: dict[str, Any]) -> int:
    report = bounds_report(_instance_spec(opts))
    print(format_report(report, opts.get("fmt") or "text"))
    return 0


def cmd_experiment(opts: dict[str, Any], settings: Settings) -> int:
    if not opts.get("name"):
        raise ConfigError("experiment needs --name")
    k_grid = opts.get("k_grid")
    config = preset(
        opts["name"],
        opts.get("scale") or "desk",
        k_grid=tuple(k_grid) if k_grid is not None else None,
        L=opts.get("L"),
        n_trials=opts.get("n"),
        n_jobs=opts.get("jobs"),
        master_seed=opts.get("seed"),
        max_steps=opts.get("max_steps"),
        radius_form=opts.get("radius_form"),
        algorithms=opts.get("algorithms"),
    )
    result = run_experiment(config, opts.get("out") or settings.output_dir)
    print(result.summary.to_string(index=False))
    if result.fits or result.refused:
        print()
        print(result.fits_frame().to_string(index=False))
        for fam, exc in result.refused.items():
            print(f"{fam}: fit refused ({exc})")
    return 0


def _fit_points(path: Path) -> list[tuple[float, float]]:
    try:
        frame = pd.read_csv(path)
    except FileNotFoundError:
        raise ConfigError(f"input file not found: {path}") from None
    if {"K", "mean_steps"} <= set(frame.columns):
        pts = frame[["K", "mean_steps"]]
    elif {"K", "steps"} <= set(frame.columns):
        pts = frame.groupby("K", sort=True)["steps"].mean().reset_index().rename(columns={"steps": "mean_steps"})
    else:
        raise ConfigError(f"{path} needs columns K,mean_steps (or a trials CSV with K,steps)")
    return [(float(k), float(y)) for k, y in pts.itertuples(index=False)]


def cmd_fit(opts: dict[str, Any]) -> int:
    if opts.get("input") is None:
        raise ConfigError("fit needs --in")
    fit = fit_scaling(_fit_points(opts["input"]), opts.get("model") or "linear")
    text = json.dumps(fit.as_row(), indent=2)
    if opts.get("out"):
        Path(opts["out"]).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = Settings.from_env()
        opts = _resolve(args, settings)
        configure_logging(opts.get("log_level") or settings.log_level)
        if args.command == "run":
            return cmd_run(opts)
        if args.command == "trials":
            return cmd_trials(opts)
        if args.command == "bounds":
            return cmd_bounds(opts)
        if args.command == "experiment":
            return cmd_experiment(opts, settings)
        return cmd_fit(opts)
    except CascadeBAIError as exc:
        print(f"cascadebai: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
