# backend/core/tests/conftest.py
# Shared fixtures. backend/core goes on sys.path so the suite also runs
# without an editable install (same layout scripts/run.sh relies on).

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from cascadebai.models.instance import linspace_weights, make_instance, two_prob_weights  # noqa: E402


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def three_items():
    return make_instance([0.9, 0.5, 0.3], K=1)


@pytest.fixture
def linspace16():
    """L=16, K=4 with weights evenly spaced 0.9 -> 0.15."""
    return make_instance(linspace_weights(0.9, 0.15, 16), K=4)


@pytest.fixture
def easy_two_prob():
    """Well separated two-probability instance that terminates in a few thousand steps."""
    return make_instance(two_prob_weights(0.9, 0.2, 2, 4), K=2)
