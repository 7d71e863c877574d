"""Acceptance suite: one test per release criterion, each printing a PASS/FAIL line."""
import numpy as np

from bellce.measures import Ensemble, exact_ce, exact_ntangle, gap_identity, power_set
from bellce.noise import default_noise_model, ideal_noise_model, noisy_bell_pipeline, noisy_cswap_pipeline
from bellce.sampler import (
    bell_outcome_probabilities,
    bell_sample,
    count_singlet_rounds,
    cswap_distribution,
    estimate_ce,
    estimate_ce_lower_bound,
    estimate_ntangle,
    estimate_subsystem_purity,
    expected_ce_estimate,
    expected_ntangle_estimate,
    expected_purity_estimate,
    format_record,
    parse_record,
)
from bellce.states import NamedStateFamily, analytic_ce, ghz_state, haar_state, make_state
from bellce.statevec import subsystem_purity
from bellce.stats import clopper_pearson_bounds, expected_ci_width, hoeffding_epsilon, hoeffding_shots

FAMILIES = ("ghz", "w", "line")


def report(criterion, ok, detail):
    print(f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}")
    assert ok, detail


def nonempty_subsets(n):
    return [s for s in power_set(range(n)) if s]


def test_criterion_1_closed_forms():
    worst = 0.0
    for fam in FAMILIES:
        for n in range(2, 13):
            value = exact_ce(make_state(NamedStateFamily(fam, n)), range(n)).value
            worst = max(worst, abs(value - analytic_ce(fam, n)))
    spot = [exact_ce(make_state(NamedStateFamily(f, n)), range(n)).value for f, n in
            (("ghz", 3), ("w", 3), ("line", 4))]
    ok = worst <= 1e-10 and np.allclose(spot, [0.375, 1 / 3, 0.5], atol=1e-10, rtol=0)
    report(1, ok, f"max |exact - closed form| = {worst:.2e} over GHZ/W/LINE n=2..12")


def test_criterion_2_unbiased_by_enumeration():
    worst = 0.0
    for n in (2, 3, 4, 5):
        for i in range(50):
            psi = haar_state(n, 1000 * n + i)
            probs = bell_outcome_probabilities(psi)
            for s in nonempty_subsets(n):
                worst = max(worst, abs(expected_ce_estimate(probs, s) - exact_ce(psi, s).value))
                worst = max(worst, abs(expected_purity_estimate(probs, s) - subsystem_purity(psi, s)))
            worst = max(worst, abs(expected_ntangle_estimate(probs) - exact_ntangle(psi)))
    report(2, worst <= 1e-10, f"max estimator bias = {worst:.2e} over 200 Haar states, n=2..5")


def test_criterion_3_cswap_equals_bell():
    worst = 0.0
    for fam in FAMILIES:
        for n in range(2, 7):
            psi = make_state(NamedStateFamily(fam, n))
            cswap = cswap_distribution(psi).ce()
            bell = noisy_bell_pipeline(NamedStateFamily(fam, n), model=ideal_noise_model()).ce_estimated
            worst = max(worst, abs(cswap - bell))
    report(3, worst <= 1e-10, f"max |c-SWAP CE - Bell CE| = {worst:.2e} for n <= 6")


def test_criterion_4_finite_sample_statistics():
    psi, truth, seeds = ghz_state(3), 0.375, range(100)
    M = 100_000
    ks = np.array([count_singlet_rounds(bell_sample(psi, M, seed)) for seed in seeds])
    lo, hi = clopper_pearson_bounds(ks, M, 0.05)
    covered = int(np.sum((lo <= truth) & (truth <= hi)))
    M_h = hoeffding_shots(0.05, 0.05)
    close = sum(abs(estimate_ce(bell_sample(psi, M_h, 10_000 + s)) - truth) < 0.05 for s in seeds)
    ok = covered >= 92 and M_h == 738 and close >= 95
    report(4, ok, f"CP coverage {covered}/100 at M=1e5; Hoeffding M={M_h} within 0.05 in {close}/100")


def test_criterion_5_gap_identity():
    rng = np.random.default_rng(5)
    worst = 0.0
    for n in (2, 3, 4):
        for _ in range(100):
            p = float(rng.uniform(0.05, 0.95))
            a, b = (haar_state(n, int(x)) for x in rng.integers(0, 2**31, size=2))
            worst = max(worst, abs(gap_identity(Ensemble(((p, a), (1 - p, b)))).difference))
    pure = max(abs(gap_identity(haar_state(n, 9)).lhs) for n in (2, 3, 4))
    ok = worst <= 1e-10 and pure <= 1e-10
    report(5, ok, f"max gap-identity residual {worst:.2e}; pure-state gap {pure:.2e}")


def test_criterion_6_noisy_ordering():
    model = default_noise_model()
    failures = []
    for n in range(2, 9):
        named = NamedStateFamily("ghz", n)
        b, c = noisy_bell_pipeline(named, model), noisy_cswap_pipeline(named, model)
        if not (b.relative_error < c.relative_error and b.squared_norm > c.squared_norm):
            failures.append(n)
    norms = [noisy_bell_pipeline(NamedStateFamily("ghz", n), model).squared_norm for n in range(8, 13)]
    bell_only_ok = all(x > y for x, y in zip(norms, norms[1:])) and 0 < norms[-1] <= 1
    ok = not failures and bell_only_ok
    report(6, ok, f"Bell beats c-SWAP on error and norm for GHZ n=2..8 (failures: {failures}); "
                  f"Bell arm norm decreasing through n=12: {bell_only_ok}")


def test_criterion_7_noisy_bell_accuracy():
    model = default_noise_model()
    worst, monotone, norm10 = 0.0, True, {}
    for fam in FAMILIES:
        norms = []
        for n in range(2, 11):
            row = noisy_bell_pipeline(NamedStateFamily(fam, n), model)
            worst = max(worst, row.relative_error)
            norms.append(row.squared_norm)
        monotone &= all(x > y for x, y in zip(norms, norms[1:]))
        norm10[fam] = norms[-1]
    ok = worst <= 2e-3 and monotone and min(norm10.values()) >= 0.98
    report(7, ok, f"max relative error {worst:.2e}; norms decreasing {monotone}; "
                  f"n=10 norms {', '.join(f'{k}={v:.4f}' for k, v in norm10.items())}")


def test_criterion_8_planner_curves():
    ps = (analytic_ce("line", 4), analytic_ce("line", 12))
    Ms = (100, 1000, 10_000, 100_000)
    ok, worst_ratio = True, 0.0
    hoeff = [hoeffding_epsilon(M, 0.05) for M in Ms]
    for p in ps:
        cp = [expected_ci_width(p, M, 0.05) for M in Ms]
        ok &= all(c <= h for c, h in zip(cp, hoeff))
        ok &= all(x > y for x, y in zip(cp, cp[1:]))
        worst_ratio = max(worst_ratio, max(c / h for c, h in zip(cp, hoeff)))
    ok &= all(x > y for x, y in zip(hoeff, hoeff[1:]))
    report(8, ok, f"CP half width / Hoeffding epsilon <= {worst_ratio:.3f} at p in {{0.5, 1-377/4096}}")


def test_criterion_9_record_round_trip():
    rec = bell_sample(haar_state(4, 99), 5000, 99, source="haar n=4")
    back = parse_record(format_record(rec))

    def estimates(r):
        return (estimate_ce(r), estimate_ce(r, (1, 3)), estimate_ntangle(r),
                estimate_subsystem_purity(r, (0, 2)), estimate_ce_lower_bound(r))

    ok = estimates(rec) == estimates(back) and np.array_equal(rec.rounds, back.rounds)
    report(9, ok, "serialize -> parse reproduces every estimate bit-for-bit")
