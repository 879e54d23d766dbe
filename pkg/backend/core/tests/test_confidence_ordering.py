from __future__ import annotations

import math

import numpy as np
import pytest

from cascadebai.agents.confidence import RadiusTable, confidence_radius
from cascadebai.coordinators.ordering import ORDERINGS, OrderingCoordinator
from cascadebai.errors import ConfigError


# ---------------------------
# confidence radius
# ---------------------------

def test_radius_example():
    assert confidence_radius(2, 0.1) == pytest.approx(4 * math.sqrt(math.log(20) / 2))
    assert confidence_radius(2, 0.1) == pytest.approx(4.8955, abs=1e-4)


def test_radius_at_one_observation():
    assert confidence_radius(1, 0.1) == pytest.approx(4 * math.sqrt(math.log(10)))


@pytest.mark.parametrize("T", [0, -3])
def test_radius_infinite_without_observations(T):
    assert confidence_radius(T, 0.1) == math.inf


def test_radius_decreasing_from_two():
    values = [confidence_radius(T, 0.05) for T in range(2, 5000)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert confidence_radius(10 ** 9, 0.05) < 0.01


def test_appendix_form_divides_by_t_plus_one():
    T, r = 50, 0.02
    expected = 4 * math.sqrt(math.log(math.log2(2 * T) / r) / (T + 1))
    assert confidence_radius(T, r, "appendix") == pytest.approx(expected)
    assert confidence_radius(T, r, "appendix") < confidence_radius(T, r)


@pytest.mark.parametrize("r", [0.0, 1.0, -0.5])
def test_radius_rejects_bad_rho(r):
    with pytest.raises(ValueError):
        confidence_radius(5, r)
    with pytest.raises(ValueError):
        RadiusTable(r)


@pytest.mark.parametrize("form", ["main", "appendix"])
def test_radius_table_matches_scalar(form):
    table = RadiusTable(0.03, form, size=8)
    counts = np.array([0, 1, 2, 7, 8, 9, 100, 20_000])
    got = table(counts)
    assert got[0] == math.inf
    np.testing.assert_allclose(got[1:], [confidence_radius(int(c), 0.03, form) for c in counts[1:]], rtol=1e-12)


def test_radius_table_empty_counts():
    assert RadiusTable(0.1)(np.array([], dtype=np.int64)).size == 0


# ---------------------------
# ordering policies
# ---------------------------

def test_ordering_names():
    assert ORDERINGS == ("tcount", "emp-asc", "emp-desc", "ucb-asc", "ucb-desc", "lcb-asc", "lcb-desc")
    with pytest.raises(ConfigError):
        OrderingCoordinator("random")


def test_tcount_ascending_count_ties_by_index():
    survivors = np.array([1, 3, 4, 6])
    counts = np.array([5, 2, 5, 2])
    out = OrderingCoordinator("tcount").order(survivors, counts, np.zeros(4))
    assert out.tolist() == [3, 6, 1, 4]
    assert not OrderingCoordinator("tcount").needs_bounds


def test_empirical_orderings():
    survivors = np.array([0, 1, 2, 3])
    counts = np.array([4, 4, 4, 4])
    means = np.array([0.5, 0.25, 0.75, 0.25])
    asc = OrderingCoordinator("emp-asc").order(survivors, counts, means)
    desc = OrderingCoordinator("emp-desc").order(survivors, counts, means)
    assert asc.tolist() == [1, 3, 0, 2]
    assert desc.tolist() == [2, 0, 1, 3]


def test_unobserved_items_go_first():
    survivors = np.array([0, 1, 2, 3])
    counts = np.array([3, 0, 5, 0])
    means = np.array([0.9, 0.0, 0.1, 0.0])
    radii = np.array([0.2, np.inf, 0.1, np.inf])
    for name in ORDERINGS[1:]:
        out = OrderingCoordinator(name).order(survivors, counts, means, radii)
        assert out[:2].tolist() == [1, 3], name


def test_confidence_bound_orderings():
    survivors = np.array([0, 1, 2])
    counts = np.array([10, 2, 40])
    means = np.array([0.5, 0.45, 0.55])
    radii = np.array([0.2, 0.5, 0.05])
    # ucb = 0.7, 0.95, 0.6 ; lcb = 0.3, -0.05, 0.5
    assert OrderingCoordinator("ucb-asc").order(survivors, counts, means, radii).tolist() == [2, 0, 1]
    assert OrderingCoordinator("ucb-desc").order(survivors, counts, means, radii).tolist() == [1, 0, 2]
    assert OrderingCoordinator("lcb-asc").order(survivors, counts, means, radii).tolist() == [1, 0, 2]
    assert OrderingCoordinator("lcb-desc").order(survivors, counts, means, radii).tolist() == [2, 0, 1]
    assert OrderingCoordinator("ucb-asc").needs_bounds


def test_ordering_is_a_permutation(rng):
    survivors = np.sort(rng.choice(50, size=20, replace=False))
    counts = rng.integers(0, 6, size=20)
    means = np.where(counts > 0, rng.uniform(size=20), 0.0)
    radii = np.where(counts > 0, rng.uniform(0, 1, size=20), np.inf)
    for name in ORDERINGS:
        out = OrderingCoordinator(name).order(survivors, counts, means, radii)
        assert sorted(out.tolist()) == survivors.tolist()
