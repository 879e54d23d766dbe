# backend/core/cascadebai/settings.py
# ------------------------------------------------------------
# Runtime defaults, read from the environment (set them in .env;
# scripts/run.sh exports it before launching the CLI).
#
#   CASCADEBAI_MAX_STEPS     step cap per run            (10_000_000)
#   CASCADEBAI_MASTER_SEED   master seed for trial seeds (20240101)
#   CASCADEBAI_N_JOBS        joblib workers for trials   (1)
#   CASCADEBAI_N_TRIALS      trials per configuration    (20)
#   CASCADEBAI_RADIUS_FORM   "main" or "appendix"        (main)
#   CASCADEBAI_LOG_LEVEL     logging level name          (INFO)
#   CASCADEBAI_OUTPUT_DIR    where CSVs are written      (results)
# ------------------------------------------------------------

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Literal

from .errors import ConfigError

RadiusForm = Literal["main", "appendix"]

DEFAULT_MAX_STEPS = 10_000_000
DEFAULT_MASTER_SEED = 20240101


@dataclass(frozen=True)
class Settings:
    max_steps: int = DEFAULT_MAX_STEPS
    master_seed: int = DEFAULT_MASTER_SEED
    n_jobs: int = 1
    n_trials: int = 20
    radius_form: RadiusForm = "main"
    log_level: str = "INFO"
    output_dir: str = "results"

    @classmethod
    def from_env(cls) -> "Settings":
        """Build settings from CASCADEBAI_* variables, falling back to defaults."""
        radius_form = os.getenv("CASCADEBAI_RADIUS_FORM", "main").strip().lower()
        if radius_form not in ("main", "appendix"):
            raise ConfigError(f"CASCADEBAI_RADIUS_FORM must be 'main' or 'appendix', got {radius_form!r}")
        try:
            return cls(
                max_steps=int(os.getenv("CASCADEBAI_MAX_STEPS", DEFAULT_MAX_STEPS)),
                master_seed=int(os.getenv("CASCADEBAI_MASTER_SEED", DEFAULT_MASTER_SEED)),
                n_jobs=int(os.getenv("CASCADEBAI_N_JOBS", 1)),
                n_trials=int(os.getenv("CASCADEBAI_N_TRIALS", 20)),
                radius_form=radius_form,  # type: ignore[arg-type]
                log_level=os.getenv("CASCADEBAI_LOG_LEVEL", "INFO").upper(),
                output_dir=os.getenv("CASCADEBAI_OUTPUT_DIR", "results"),
            )
        except ValueError as exc:
            raise ConfigError(f"Bad CASCADEBAI_* environment value: {exc}") from exc
