# backend/core/cascadebai/harness/fitting.py
# ------------------------------------------------------------
# Scaling fits for the K-sweep studies.
# - fit_scaling(): least squares of mean steps on c1 * K^p + c2
#   (p = 1 or 2) with sklearn, plus the R^2 statistic.
# - A constant target has no variance to explain: R^2 is reported
#   as 0 with c1 = 0 and c2 equal to the constant.
# ------------------------------------------------------------

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
from sklearn.linear_model import LinearRegression
from sklearn.metrics import r2_score

from ..errors import ConfigError, DegeneratePoints

logger = logging.getLogger(__name__)


class ScalingModel(str, Enum):
    LINEAR = "LinearInK"
    QUADRATIC = "QuadraticInK"

    @property
    def power(self) -> int:
        return 1 if self is ScalingModel.LINEAR else 2

    @classmethod
    def parse(cls, value: "str | ScalingModel") -> "ScalingModel":
        if isinstance(value, ScalingModel):
            return value
        aliases = {"linear": cls.LINEAR, "quadratic": cls.QUADRATIC}
        key = str(value).strip()
        if key.lower() in aliases:
            return aliases[key.lower()]
        try:
            return cls(key)
        except ValueError:
            raise ConfigError(f"Unknown scaling model {value!r}; use linear or quadratic") from None


@dataclass(frozen=True)
class FitResult:
    model: ScalingModel
    c1: float
    c2: float
    r_squared: float
    n_points: int

    def predict(self, K: Sequence[float] | np.ndarray) -> np.ndarray:
        return self.c1 * np.asarray(K, dtype=float) ** self.model.power + self.c2

    def as_row(self) -> dict:
        return {
            "model": self.model.value,
            "c1": self.c1,
            "c2": self.c2,
            "r_squared": self.r_squared,
            "n_points": self.n_points,
        }


def fit_scaling(points: Iterable[tuple[float, float]], model: str | ScalingModel) -> FitResult:
    """Fit mean_steps = c1 * K^p + c2 on (K, mean_steps) points."""
    model = ScalingModel.parse(model)
    pts = np.asarray(list(points), dtype=float).reshape(-1, 2)
    K, y = pts[:, 0], pts[:, 1]

    if K.size < 3:
        raise DegeneratePoints(f"need at least 3 (K, mean_steps) points, got {K.size}")
    if np.unique(K).size != K.size:
        raise DegeneratePoints(f"K values must be distinct, got {K.tolist()}")

    if np.ptp(y) == 0.0:
        return FitResult(model=model, c1=0.0, c2=float(y[0]), r_squared=0.0, n_points=int(K.size))

    X = (K ** model.power).reshape(-1, 1)
    reg = LinearRegression().fit(X, y)
    r2 = float(r2_score(y, reg.predict(X)))
    fit = FitResult(model=model, c1=float(reg.coef_[0]), c2=float(reg.intercept_), r_squared=r2, n_points=int(K.size))
    logger.info("fit %s: c1=%.6g c2=%.6g R^2=%.4f on %d points", model.value, fit.c1, fit.c2, r2, K.size)
    return fit
