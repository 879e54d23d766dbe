# backend/core/cascadebai/agents/confidence.py
# ------------------------------------------------------------
# Anytime (iterated-logarithm) confidence radius shared by the
# CascadeBAI and BatchRacing agents.
#
#   C(T) = 4 sqrt( log( log2(2T) / rho ) / T ),   C(0) = +inf
#
# The "appendix" form divides by T+1 instead of T; it is kept as
# a switch for sensitivity runs.
# ------------------------------------------------------------

from __future__ import annotations

import math

import numpy as np

from ..settings import RadiusForm


def confidence_radius(T: int, rho: float, form: RadiusForm = "main") -> float:
    """Radius after T observations; +inf when T == 0."""
    if T <= 0:
        return math.inf
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    denom = T + 1 if form == "appendix" else T
    return 4.0 * math.sqrt(math.log(math.log2(2.0 * T) / rho) / denom)


class RadiusTable:
    """
    Memoized radii indexed by observation count.

    Counts only ever grow by one per step, so the table is extended
    by doubling and looked up with plain fancy indexing.
    """

    def __init__(self, rho: float, form: RadiusForm = "main", size: int = 4096):
        if not 0.0 < rho < 1.0:
            raise ValueError(f"rho must lie in (0, 1), got {rho}")
        self.rho = float(rho)
        self.form = form
        self._table = self._build(max(int(size), 2))

    def _build(self, size: int) -> np.ndarray:
        t = np.arange(size, dtype=float)
        t[0] = 1.0  # placeholder, overwritten below
        denom = t + 1.0 if self.form == "appendix" else t
        table = 4.0 * np.sqrt(np.log(np.log2(2.0 * t) / self.rho) / denom)
        table[0] = np.inf
        return table

    def __call__(self, counts: np.ndarray) -> np.ndarray:
        top = int(counts.max()) if counts.size else 0
        if top >= self._table.size:
            self._table = self._build(max(2 * self._table.size, top + 1))
        return self._table[counts]
