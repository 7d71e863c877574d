import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import beta

from bellce.errors import ContractViolation
from bellce.stats import (
    clopper_pearson,
    clopper_pearson_bounds,
    expected_ci_bounds,
    expected_ci_width,
    hoeffding_epsilon,
    hoeffding_shots,
    plan_budget,
)


def cp_beta_oracle(k, M, delta):
    lo = 0.0 if k == 0 else beta.ppf(delta / 2, k, M - k + 1)
    hi = 1.0 if k == M else beta.ppf(1 - delta / 2, k + 1, M - k)
    return lo, hi


def upper_tail_sum(k, M, p):
    return sum(math.comb(M, i) * p**i * (1 - p) ** (M - i) for i in range(k + 1))


def test_hoeffding_frozen_values():
    assert hoeffding_shots(0.05, 0.05) == 738
    assert hoeffding_shots(0.01, 0.05) == 18445
    assert hoeffding_shots(1.0, 0.999999) == 1


@pytest.mark.parametrize("eps, delta", [(0.05, 0.05), (0.01, 0.05), (0.1, 0.01), (0.2, 0.3), (0.003, 0.001)])
def test_hoeffding_is_minimal(eps, delta):
    M = hoeffding_shots(eps, delta)
    assert 2 * math.exp(-2 * M * eps**2) <= delta
    if M > 1:
        assert 2 * math.exp(-2 * (M - 1) * eps**2) > delta
    assert hoeffding_epsilon(M, delta) <= eps


def test_hoeffding_monotone_in_delta():
    ms = [hoeffding_shots(0.05, d) for d in (0.5, 0.1, 0.05, 0.01, 0.001)]
    assert ms == sorted(ms)


@pytest.mark.parametrize("eps, delta", [(0, 0.05), (1.5, 0.05), (0.05, 0), (0.05, 1)])
def test_hoeffding_rejects_out_of_range(eps, delta):
    with pytest.raises(ContractViolation):
        hoeffding_shots(eps, delta)


def test_cp_closed_form_at_zero():
    ci = clopper_pearson(0, 100, 0.05)
    assert ci.lower == 0.0
    assert ci.upper == pytest.approx(1 - 0.025 ** (1 / 100), abs=1e-10)
    assert ci.upper == pytest.approx(0.0362167, abs=1e-7)
    assert clopper_pearson(100, 100, 0.05).upper == 1.0
    assert ci.level == pytest.approx(0.95)


def test_cp_symmetric_at_half():
    ci = clopper_pearson(50, 100, 0.05)
    assert ci.lower < 0.5 < ci.upper
    assert ci.lower == pytest.approx(1 - ci.upper, abs=1e-9)


@pytest.mark.parametrize("M", [1, 7, 30, 100, 1000, 100_000, 10_000_000])
def test_cp_matches_beta_quantiles(M):
    ks = sorted({0, 1, M // 3, M // 2, M - 1, M})
    lo, hi = clopper_pearson_bounds(ks, M, 0.05)
    for k, a, b in zip(ks, lo, hi):
        ea, eb = cp_beta_oracle(k, M, 0.05)
        assert a == pytest.approx(ea, abs=2e-10)
        assert b == pytest.approx(eb, abs=2e-10)


def test_cp_endpoint_solves_tail_equation_small_M():
    M, delta = 20, 0.1
    for k in range(M):
        ci = clopper_pearson(k, M, delta)
        assert upper_tail_sum(k, M, ci.upper) == pytest.approx(delta / 2, abs=1e-8)


@settings(max_examples=50, deadline=None)
@given(M=st.integers(1, 5000), data=st.data(), delta=st.floats(0.001, 0.5))
def test_cp_mirror_symmetry(M, data, delta):
    k = data.draw(st.integers(0, M))
    a = clopper_pearson(k, M, delta)
    b = clopper_pearson(M - k, M, delta)
    assert a.lower == pytest.approx(1 - b.upper, abs=1e-9)
    assert a.upper == pytest.approx(1 - b.lower, abs=1e-9)


def test_cp_monotone_in_k():
    lo, hi = clopper_pearson_bounds(np.arange(201), 200, 0.05)
    assert np.all(np.diff(lo) >= 0) and np.all(np.diff(hi) >= 0)


def test_cp_rejects_bad_counts():
    with pytest.raises(ContractViolation):
        clopper_pearson(11, 10, 0.05)
    with pytest.raises(ContractViolation):
        clopper_pearson(-1, 10, 0.05)
    with pytest.raises(ContractViolation):
        clopper_pearson(2.5, 10, 0.05)
    with pytest.raises(ContractViolation):
        clopper_pearson(1, 10, 1.5)


@pytest.mark.parametrize("p, M", [(0.1, 50), (0.375, 200), (0.5, 1000), (0.92, 400)])
def test_cp_coverage(p, M):
    delta, trials = 0.05, 10_000
    rng = np.random.default_rng(int(p * 1000) + M)
    k = rng.binomial(M, p, size=trials)
    uniq, inv = np.unique(k, return_inverse=True)
    lo, hi = clopper_pearson_bounds(uniq, M, delta)
    covered = np.mean((lo[inv] <= p) & (p <= hi[inv]))
    sigma = math.sqrt(delta * (1 - delta) / trials)
    assert covered >= 1 - delta - 3 * sigma


def test_expected_width_at_p_zero():
    for M in (10, 100, 1000):
        assert expected_ci_width(0.0, M, 0.05) == pytest.approx((1 - 0.025 ** (1 / M)) / 2, abs=1e-10)


def test_expected_width_truncation_reported():
    b = expected_ci_bounds(0.5, 10_000, 0.05)
    assert 0 <= b.truncated_mass < 1e-12
    assert b.mean_lower < 0.5 < b.mean_upper
    assert expected_ci_bounds(0.3, 5, 0.05).truncated_mass < 1e-14


def test_expected_width_brute_force_small_M():
    M, p, delta = 25, 0.3, 0.05
    w = [math.comb(M, k) * p**k * (1 - p) ** (M - k) for k in range(M + 1)]
    ends = [cp_beta_oracle(k, M, delta) for k in range(M + 1)]
    expected = sum(wk * (hi - lo) for wk, (lo, hi) in zip(w, ends)) / 2
    assert expected_ci_width(p, M, delta) == pytest.approx(expected, abs=1e-9)


def test_expected_width_shrinks_and_beats_hoeffding():
    assert expected_ci_width(0.5, 4000, 0.05) < expected_ci_width(0.5, 1000, 0.05)
    for p in (0.0, 0.1, 0.375, 0.5, 0.9):
        for M in (10, 100, 1000, 10_000):
            assert expected_ci_width(p, M, 0.05) <= hoeffding_epsilon(M, 0.05)


def test_plan_budget_examples():
    plan = plan_budget(0.05, 0.05)
    assert plan.M_hoeffding == 738 and plan.M_cp is None
    plan = plan_budget(0.05, 0.05, assumed_p=0.375)
    assert plan.M_cp <= 738
    # minimality of the search
    assert expected_ci_width(0.375, plan.M_cp, 0.05) <= 0.05
    assert expected_ci_width(0.375, plan.M_cp - 1, 0.05) > 0.05


def test_plan_budget_subsystem_warning():
    # 2^-5 = 0.03125 is finer than the 0.05 target
    assert plan_budget(0.05, 0.05, subsystem_size=5).warnings
    assert not plan_budget(0.05, 0.05, subsystem_size=4).warnings
    assert not plan_budget(0.01, 0.05, subsystem_size=5).warnings
    with pytest.raises(ContractViolation):
        plan_budget(0.05, 0.05, assumed_p=1.5)
