# backend/core/cascadebai/harness/config.py
# ------------------------------------------------------------
# Harness configuration.
# - InstanceSpec: how to build weights (explicit list, two-probability
#   or linspace) plus K / delta / epsilon.
# - AlgoSpec: which racing algorithm to run and with which knobs.
# - Weight families of the K-sweep studies, read from
#   registry/families.json. Expressions come from a closed vocabulary.
# - JSON config files whose keys mirror the CLI flags.
#   Precedence: flag > file > environment > default.
# ------------------------------------------------------------

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Mapping

from ..agents.batch_racing import run_batch_racing
from ..agents.cascade_bai import RunConfig, RunResult, run_cascade_bai
from ..coordinators.ordering import ORDERINGS
from ..errors import ConfigError
from ..integrations.click_model import RngStream
from ..models.instance import Instance, linspace_weights, make_instance, two_prob_weights
from ..settings import DEFAULT_MAX_STEPS, RadiusForm
from .fitting import ScalingModel

REGISTRY_PATH = Path(__file__).resolve().parent.parent / "registry" / "families.json"

# Keys a config file may carry (same names as the CLI flags).
CONFIG_KEYS = frozenset({
    "weights", "two_prob", "linspace", "K", "L", "delta", "eps",
    "algo", "b", "order", "seed", "max_steps", "n", "jobs", "out",
    "name", "scale", "k_grid", "model", "radius_form", "in", "format",
    "algorithms", "log_level",
})


# ============================================================
# Instance specs
# ============================================================

def _pair(value: Any, names: tuple[str, str], what: str) -> tuple[float, float]:
    if isinstance(value, Mapping):
        try:
            return float(value[names[0]]), float(value[names[1]])
        except KeyError as exc:
            raise ConfigError(f"{what} needs keys {names}, missing {exc}") from None
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return float(value[0]), float(value[1])
    raise ConfigError(f"{what} must be a pair or a mapping with {names}, got {value!r}")


@dataclass(frozen=True)
class InstanceSpec:
    """Exactly one of weights / two_prob / linspace must be set."""
    K: int
    L: int | None = None
    weights: tuple[float, ...] | None = None
    two_prob: tuple[float, float] | None = None
    linspace: tuple[float, float] | None = None
    delta: float = 0.1
    epsilon: float = 0.0

    def __post_init__(self) -> None:
        given = [x is not None for x in (self.weights, self.two_prob, self.linspace)]
        if sum(given) != 1:
            raise ConfigError("give exactly one of weights, two_prob or linspace")
        if self.weights is None and self.L is None:
            raise ConfigError("two_prob and linspace instances need L")

    def build(self) -> Instance:
        if self.weights is not None:
            w = self.weights
        elif self.two_prob is not None:
            w = two_prob_weights(self.two_prob[0], self.two_prob[1], self.K, int(self.L))
        else:
            w = linspace_weights(self.linspace[0], self.linspace[1], int(self.L))
        return make_instance(w, self.K, self.epsilon, self.delta)

    @property
    def size(self) -> int:
        return len(self.weights) if self.weights is not None else int(self.L)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "InstanceSpec":
        if "K" not in data or data["K"] is None:
            raise ConfigError("instance needs K")
        kwargs: dict[str, Any] = {
            "K": int(data["K"]),
            "L": int(data["L"]) if data.get("L") is not None else None,
            "delta": float(data["delta"]) if data.get("delta") is not None else 0.1,
            "epsilon": float(data["eps"]) if data.get("eps") is not None else 0.0,
        }
        if data.get("weights") is not None:
            kwargs["weights"] = tuple(float(x) for x in data["weights"])
        if data.get("two_prob") is not None:
            kwargs["two_prob"] = _pair(data["two_prob"], ("w_star", "w_prime"), "two_prob")
        if data.get("linspace") is not None:
            kwargs["linspace"] = _pair(data["linspace"], ("w_max", "w_min"), "linspace")
        return cls(**kwargs)


# ============================================================
# Algorithm specs
# ============================================================

@dataclass(frozen=True)
class AlgoSpec:
    """
    algo = "cascade" runs CascadeBAI with `ordering`; algo = "batrac"
    runs BatRac(b), where b = None means b = K.
    """
    algo: str = "cascade"
    b: int | None = None
    ordering: str = "tcount"
    max_steps: int = DEFAULT_MAX_STEPS
    radius_form: RadiusForm = "main"

    def __post_init__(self) -> None:
        if self.algo not in ("cascade", "batrac"):
            raise ConfigError(f"algo must be 'cascade' or 'batrac', got {self.algo!r}")
        if self.ordering not in ORDERINGS:
            raise ConfigError(f"Unknown ordering {self.ordering!r}")

    def items_per_step(self, K: int) -> int:
        return K if self.b is None else int(self.b)

    def label(self, K: int) -> str:
        if self.algo == "cascade":
            return "CascadeBAI"
        return f"BatRac({self.items_per_step(K)})"

    @property
    def ordering_label(self) -> str:
        return self.ordering if self.algo == "cascade" else "tcount"

    def run(self, instance: Instance, rng: RngStream) -> RunResult:
        config = RunConfig(ordering=self.ordering, max_steps=self.max_steps, radius_form=self.radius_form)
        if self.algo == "cascade":
            return run_cascade_bai(instance, config, rng)
        return run_batch_racing(instance, self.items_per_step(instance.K), config, rng)


# ============================================================
# Weight families
# ============================================================

EXPRESSIONS: dict[str, Callable[[int], float]] = {
    "1/K": lambda K: 1.0 / K,
    "1/K^2": lambda K: 1.0 / K ** 2,
    "1/sqrt(K)": lambda K: 1.0 / math.sqrt(K),
    "1-1/K": lambda K: 1.0 - 1.0 / K,
    "1-1/K^2": lambda K: 1.0 - 1.0 / K ** 2,
    "1-1/sqrt(K)": lambda K: 1.0 - 1.0 / math.sqrt(K),
}


@dataclass(frozen=True)
class Family:
    name: str
    w_star: str
    w_prime: str
    model: ScalingModel
    description: str = ""

    def __post_init__(self) -> None:
        for expr in (self.w_star, self.w_prime):
            if expr not in EXPRESSIONS:
                raise ConfigError(f"family {self.name}: unknown expression {expr!r}")

    def pair(self, K: int) -> tuple[float, float]:
        return EXPRESSIONS[self.w_star](K), EXPRESSIONS[self.w_prime](K)

    def instance_spec(self, K: int, L: int, delta: float = 0.1, epsilon: float = 0.0) -> InstanceSpec:
        return InstanceSpec(K=K, L=L, two_prob=self.pair(K), delta=delta, epsilon=epsilon)


def load_registry(path: str | Path | None = None) -> dict[str, Any]:
    path = Path(path) if path is not None else REGISTRY_PATH
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def load_families(path: str | Path | None = None) -> dict[str, Family]:
    raw = load_registry(path).get("families", {})
    return {
        name: Family(
            name=name,
            w_star=entry["w_star"],
            w_prime=entry["w_prime"],
            model=ScalingModel.parse(entry["model"]),
            description=entry.get("description", ""),
        )
        for name, entry in raw.items()
    }


# ============================================================
# Config files
# ============================================================

def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read a JSON config; unknown keys are an error."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return data


def merge_options(flags: Mapping[str, Any], file_values: Mapping[str, Any], defaults: Mapping[str, Any]) -> dict[str, Any]:
    """Per key: a flag that was given wins, then the file, then `defaults` (env-backed)."""
    keys = set(flags) | set(file_values) | set(defaults)
    out: dict[str, Any] = {}
    for key in keys:
        if flags.get(key) is not None:
            out[key] = flags[key]
        elif file_values.get(key) is not None:
            out[key] = file_values[key]
        else:
            out[key] = defaults.get(key)
    return out
