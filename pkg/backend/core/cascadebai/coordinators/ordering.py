# backend/core/cascadebai/coordinators/ordering.py
# ------------------------------------------------------------
# Within-arm ordering policies for CascadeBAI.
# - "tcount" (the algorithm's own rule): ascending observation
#   count, smaller index first on ties.
# - Six heuristics: ascending/descending empirical mean, UCB or LCB.
#   Items never observed go first under every heuristic (their
#   mean and bounds are undefined); remaining ties fall back to
#   observation count, then index.
# The agent pulls the first min(K, |D|) items of the returned order.
# ------------------------------------------------------------

from __future__ import annotations

from typing import Literal, get_args

import numpy as np

from ..errors import ConfigError

OrderingName = Literal["tcount", "emp-asc", "emp-desc", "ucb-asc", "ucb-desc", "lcb-asc", "lcb-desc"]
ORDERINGS: tuple[str, ...] = get_args(OrderingName)


class OrderingCoordinator:
    """Sorts the survival set before each pull."""

    def __init__(self, name: str = "tcount"):
        if name not in ORDERINGS:
            raise ConfigError(f"Unknown ordering {name!r}; pick one of {', '.join(ORDERINGS)}")
        self.name = name
        self.needs_bounds = name != "tcount"

    def order(
        self,
        survivors: np.ndarray,
        counts: np.ndarray,
        means: np.ndarray,
        radii: np.ndarray | None = None,
    ) -> np.ndarray:
        """
        Return `survivors` (ascending item indices) reordered by this policy.
        `counts`, `means`, `radii` are aligned with `survivors`.
        """
        if self.name == "tcount":
            # stable sort keeps the ascending-index order on ties
            return survivors[np.argsort(counts, kind="stable")]

        kind, direction = self.name.split("-")
        if kind == "emp":
            key = means
        else:
            r = np.where(counts > 0, radii, 0.0)
            key = means + r if kind == "ucb" else means - r
        if direction == "desc":
            key = -key
        observed = (counts > 0).astype(np.int8)
        # np.lexsort: last key is primary
        return survivors[np.lexsort((survivors, counts, key, observed))]
