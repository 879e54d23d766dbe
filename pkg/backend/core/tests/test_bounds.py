from __future__ import annotations

import math

import numpy as np
import pytest

from cascadebai.errors import BadDistribution, DegenerateQ, EpsilonNotZero, ZeroMinWeight
from cascadebai.integrations.click_model import expected_observations, observation_distribution
from cascadebai.models.bounds import (
    Regime,
    concentration_event_frequency,
    kl_bernoulli,
    lower_bound,
    lower_bound_two_prob,
    lsg_check,
    m_coefficients,
    mu_lower,
    mu_lower_analytic,
    mu_upper,
    mu_upper_analytic,
    n1_case_bound,
    n3_expanded,
    n3_summation_by_parts,
    n3_telescoping,
    observation_lsg_check,
    stopping_time_bound,
    upper_bound_terms,
    v_param,
)
from cascadebai.models.instance import gaps, make_instance, two_prob_weights


def _random_instance(rng, epsilon=0.0):
    L = int(rng.integers(4, 14))
    K = int(rng.integers(2, L))
    w = np.sort(rng.uniform(0.02, 0.98, size=L))[::-1]
    return make_instance(w, K, epsilon=epsilon)


# ---------------------------
# mu / v
# ---------------------------

def test_mu_lower_examples():
    assert mu_lower(1, [0.3, 0.8, 0.1]) == pytest.approx(1.0)
    assert mu_lower(2, [0.5, 0.5, 0.5]) == pytest.approx(1.5)
    assert mu_lower(2, [0.9, 0.1, 0.05]) == pytest.approx(1.1)


def test_mu_upper_examples():
    assert mu_upper(1, [0.9, 0.4]) == pytest.approx(1.0)
    assert mu_upper(2, [0.8, 0.8, 0.2, 0.2]) == pytest.approx(1.8)


@pytest.mark.parametrize("w", [0.05, 0.3, 0.5, 0.95])
@pytest.mark.parametrize("k", [1, 3, 8])
def test_mu_lower_closed_form_for_uniform_weights(w, k):
    assert mu_lower(k, [w] * 10) == pytest.approx((1 - (1 - w) ** k) / w, abs=1e-12)


def test_v_param_examples():
    assert v_param(3, 0.5) == pytest.approx(2 * math.sqrt(2))
    assert v_param(1, 0.7) == 1.0
    assert v_param(2, 0.9) == pytest.approx(1.5713, abs=1e-4)
    with pytest.raises(ZeroMinWeight):
        v_param(2, 0.0)


def test_sandwich_on_random_instances(rng):
    for _ in range(10_000):
        L = int(rng.integers(2, 16))
        k = int(rng.integers(1, L + 1))
        w = rng.uniform(0.01, 1.0, size=L)
        w_star, w_min = float(w.max()), float(w.min())
        lo, hi = mu_lower(k, w), mu_upper(k, w)
        arm = rng.permutation(w)[:k]
        ex = expected_observations(arm)
        assert mu_lower_analytic(k, w_star) <= lo + 1e-12
        assert lo <= ex + 1e-12
        assert ex <= hi + 1e-12
        assert hi <= mu_upper_analytic(k, w_min) + 1e-12


def test_n1_case_bound_branches():
    assert n1_case_bound(4, 0.2, 0.1, 0.1) == pytest.approx(16 * math.log(160))
    c = 8 * 4 * 0.8 ** 2 / 0.4 ** 2
    assert n1_case_bound(4, 0.8, 0.4, 0.1) == pytest.approx(c * math.log(c / 0.1))


# ---------------------------
# upper bound terms
# ---------------------------

def test_exact_identification_regime(rng):
    inst = make_instance([0.9, 0.6, 0.5, 0.3, 0.2], K=2)
    rep = upper_bound_terms(inst)
    ts = gaps(inst).sorted_thresholds()
    assert rep.regime is Regime.K_PRIME_LT_2K_MINUS_1
    assert rep.k2 == 1
    assert rep.n2 == pytest.approx(ts[: inst.L - inst.K].sum() / rep.mu[-1])
    assert rep.n1 >= 0 and rep.n2 >= 0 and rep.n3 >= 0
    assert rep.total == pytest.approx(rep.n1 + rep.n2 + rep.n3)


def test_wide_epsilon_switches_regime():
    inst = make_instance([0.9, 0.5, 0.3], K=1, epsilon=0.7)
    rep = upper_bound_terms(inst)
    assert rep.k_prime == 3
    assert rep.regime is Regime.K_PRIME_GE_2K_MINUS_1
    assert rep.n3 is None
    assert rep.n1 == pytest.approx(2.0 * math.log(2 / 0.1))
    assert rep.lower_bound is None  # epsilon > 0


def test_report_vectors():
    inst = make_instance([0.9, 0.6, 0.5, 0.3, 0.2], K=3)
    rep = upper_bound_terms(inst)
    assert rep.mu.shape == rep.mu_tilde.shape == rep.v.shape == (3,)
    assert np.all(rep.mu <= rep.mu_tilde + 1e-12)
    assert rep.lower_bound is not None and rep.lower_bound >= 0


def test_k1_uses_inverse_top_weight():
    inst = make_instance(two_prob_weights(0.3, 0.1, 6, 12), K=6)
    rep = upper_bound_terms(inst)
    assert rep.k1 == 3  # floor(1/0.3) = 3 < K-1
    inst = make_instance(two_prob_weights(0.05, 0.01, 6, 12), K=6)
    assert upper_bound_terms(inst).k1 == 5


def test_zero_weight_skips_lower_bound():
    rep = upper_bound_terms(make_instance([0.9, 0.0, 0.0], K=1))
    assert rep.lower_bound is None


def test_n3_summation_by_parts_is_exact(rng):
    for _ in range(100):
        inst = _random_instance(rng, epsilon=float(rng.choice([0.0, 0.02, 0.1])))
        g = gaps(inst)
        if g.k_prime >= 2 * inst.K - 1 or np.any(g.bar_deltas <= 0):
            continue
        rep = upper_bound_terms(inst, g)
        ts = g.sorted_thresholds()
        direct = n3_telescoping(rep.mu, ts, inst.K, g.k_prime, inst.L)
        parts = n3_summation_by_parts(rep.mu, ts, inst.K, g.k_prime, inst.L)
        assert direct == pytest.approx(parts, rel=1e-9)
        assert rep.n3 == pytest.approx(direct, rel=1e-9)


def test_expanded_n3_dominates_telescoping_plus_head(rng):
    for _ in range(100):
        inst = _random_instance(rng)
        g = gaps(inst)
        rep = upper_bound_terms(inst, g)
        K, L = inst.K, inst.L
        ts = g.sorted_thresholds()
        head = K * float(ts[L - K]) / rep.mu[K - 1]
        expanded = n3_expanded(rep.mu, ts, K, rep.k1, L, L + K - g.k_prime)
        assert expanded >= (rep.n3 + head) * (1 - 1e-9)


def test_reported_expanded_n3_position(rng):
    widened = 0
    for _ in range(100):
        inst = _random_instance(rng, epsilon=float(rng.choice([0.0, 0.05, 0.1])))
        g = gaps(inst)
        rep = upper_bound_terms(inst, g)
        if rep.n3_expanded is None:
            continue
        K, L = inst.K, inst.L
        ts = g.sorted_thresholds()
        at_k2 = n3_expanded(rep.mu, ts, K, rep.k1, L, L - rep.k2)
        assert rep.n3_expanded == pytest.approx(at_k2, rel=1e-12)
        if g.k_prime > K:
            # L - K2 and L + K - K' name the same position once K' > K
            widened += 1
            assert rep.n3_expanded == pytest.approx(n3_expanded(rep.mu, ts, K, rep.k1, L, L + K - g.k_prime), rel=1e-12)
    assert widened > 0


def test_reported_expanded_n3_two_optimal_items():
    inst = make_instance([0.9, 0.6, 0.3], K=2)
    g = gaps(inst)
    rep = upper_bound_terms(inst, g)
    assert rep.regime is Regime.K_PRIME_LT_2K_MINUS_1
    assert (rep.k1, rep.k2) == (1, 1)
    # the M_k sum is empty and the K1 and K2 terms share sigma(2)
    assert rep.n3_expanded == pytest.approx(2.0 / rep.mu[1] * float(g.sorted_thresholds()[1]))


def test_m_coefficients_length():
    mu = np.array([1.0, 1.6, 2.0, 2.2])
    m = m_coefficients(mu, K=4, K1=1)
    assert m.shape == (2,)
    assert m[0] == pytest.approx(4 / 2.2 - 3 / 2.0)


def test_stopping_time_bound():
    assert stopping_time_bound(100.0, 2.0, 3.0, 0.1) == pytest.approx(100.0 + 2 * math.log(10) * 9 / 4)


# ---------------------------
# KL and lower bound
# ---------------------------

def test_kl_examples():
    assert kl_bernoulli(0.5, 0.5) == 0.0
    assert kl_bernoulli(0.8, 0.2) == pytest.approx(0.6 * math.log(4))
    assert kl_bernoulli(0.0, 0.5) == pytest.approx(math.log(2))
    assert kl_bernoulli(1.0, 0.5) == pytest.approx(math.log(2))


@pytest.mark.parametrize("q", [0.0, 1.0])
def test_kl_degenerate_q(q):
    with pytest.raises(DegenerateQ):
        kl_bernoulli(0.5, q)


def test_kl_is_nonnegative(rng):
    for p, q in rng.uniform(0.001, 0.999, size=(200, 2)):
        assert kl_bernoulli(p, q) >= 0.0


def test_lower_bound_example():
    inst = make_instance([0.8, 0.8, 0.2, 0.2], K=2)
    expected = math.log(1 / 0.24) / 1.8 * (4 / kl_bernoulli(0.8, 0.2))
    assert lower_bound(inst) == pytest.approx(expected)
    assert lower_bound(inst) == pytest.approx(3.8128, abs=1e-3)


def test_lower_bound_vanishes_at_its_zero_point():
    inst = make_instance([0.8, 0.8, 0.2, 0.2], K=2, delta=1 / 2.4)
    assert lower_bound(inst) == pytest.approx(0.0, abs=1e-12)
    assert lower_bound(make_instance([0.8, 0.8, 0.2, 0.2], K=2, delta=0.6)) == 0.0


def test_lower_bound_needs_exact_identification():
    with pytest.raises(EpsilonNotZero):
        lower_bound(make_instance([0.8, 0.8, 0.2, 0.2], K=2, epsilon=0.1))


def test_lower_bound_all_items_optimal():
    assert lower_bound(make_instance([0.8, 0.5, 0.2], K=3)) == 0.0


def test_two_prob_corollary_dominates_theorem_value():
    inst = make_instance([0.8, 0.8, 0.2, 0.2], K=2)
    assert lower_bound_two_prob(0.8, 0.2, 2, 4, 0.1) >= lower_bound(inst)


# ---------------------------
# LSG
# ---------------------------

def test_constant_is_lsg_for_any_v():
    assert lsg_check([(3.0, 1.0)], 0.0).passed


def test_two_item_arm_passes_with_second_moment():
    assert observation_lsg_check([0.5, 0.5], math.sqrt(2.5), [-10, -5, -1, -0.1]).passed


def test_half_second_moment_fails():
    w = [0.5] + [0.0] * 9
    atoms = observation_distribution(w)
    ex2 = sum(x * x * p for x, p in atoms)
    v = 0.5 * math.sqrt(ex2)
    witness = lsg_check(atoms, v, [-0.1])
    assert not witness.passed
    assert witness.worst_lambda == pytest.approx(-0.1)
    assert witness.max_violation == pytest.approx(math.cosh(0.45) - math.exp(v * v * 0.01 / 2), rel=1e-9)
    assert not lsg_check(atoms, v).passed


def test_second_moment_implies_lsg_on_random_arms(rng):
    for _ in range(500):
        k = int(rng.integers(1, 16))
        w = rng.uniform(0.0, 1.0, size=k)
        assert observation_lsg_check(w).passed


def test_lsg_rejects_bad_inputs():
    with pytest.raises(BadDistribution):
        lsg_check([(1.0, 0.5), (2.0, 0.4)], 1.0)
    with pytest.raises(BadDistribution):
        lsg_check([], 1.0)
    with pytest.raises(ValueError):
        lsg_check([(1.0, 1.0)], 1.0, [0.5])


def test_concentration_event_is_rare():
    freq = concentration_event_frequency([0.3, 0.2, 0.1, 0.05], n=10_000, delta=0.1, repetitions=1000,
                                         rng=np.random.default_rng(3))
    assert freq <= 0.1
