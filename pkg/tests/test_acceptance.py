"""Acceptance gate: thirteen criteria, each printed as one PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` or
``python tests/test_acceptance.py``.
"""

import math
import time
from fractions import Fraction

import pytest
from scipy import stats

from fairshare.allocator import brute_force_allocation, find_fair_allocation
from fairshare.extremal import (
    SetFamily,
    all_downsets,
    check_differential_inequality,
    check_downset_inequality,
    kk_lower_bound,
    shadow,
)
from fairshare.model import Additive, Nonempty, Threshold, TwoBlock
from fairshare.shares import exact_distribution, mms, rmms, thinned_quantile_share
from fairshare.verify import ALPHA_GRID, EMC_TUPLES, P_GRID, run_suite

SEED = 42


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail, elapsed, limit):
        ok = ok and elapsed < limit
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {detail} ({elapsed:.2f}s, limit {limit:g}s)")
        assert ok, detail

    return emit


def test_01_upper_bound_infeasible(report):
    start = time.perf_counter()
    profile = [Nonempty(m=2)] * 3
    shares = [thinned_quantile_share(v, 3, 1.0, 0.5).value for v in profile]
    search = find_fair_allocation(profile, shares)
    oracle = brute_force_allocation(profile, shares)
    ok = shares == [1.0, 1.0, 1.0] and search is None and oracle is None
    report(1, ok, f"upper bound: shares {shares}, search {'INFEASIBLE' if search is None else search}",
           time.perf_counter() - start, 1)


def test_02_complementarity(report):
    start = time.perf_counter()
    v = TwoBlock.from_goods(6, [1, 2, 3], [4, 5, 6])
    r = rmms(v, 2).value
    tau = thinned_quantile_share(v, 2, 1.0, math.exp(-1)).value
    p0 = 1 - (1 - Fraction(1, 2) ** 3) ** 2
    p0_num = exact_distribution(v, 0.5, method="enumerate").probs[0]
    ok = r == 0 and tau == 1 and p0 == Fraction(15, 64) and p0_num == float(p0) and float(p0) < math.exp(-1)
    report(2, ok, f"complementarity: RMMS={r}, tau_1/e={tau}, P[v=0]={p0_num} (15/64)", time.perf_counter() - start, 5)


def test_03_rmms_identical(report):
    start = time.perf_counter()
    bad = []
    for n in (1, 2, 3):
        for m in range(1, 9):
            v = Additive(m=m, weights=(1.0,) * m)
            got = (rmms(v, n).value, mms(v, n).value)
            if got != (m // n, m // n):
                bad.append((m, n, got))
    report(3, not bad, f"RMMS = MMS = floor(m/n) on 24 (m, n) pairs, mismatches {bad}", time.perf_counter() - start, 60)


def test_04_identical_goods_ratio(report):
    start = time.perf_counter()
    n, c, q = 3, 0.5, math.exp(-1)
    dev = {}
    agree = True
    for m in (60, 240):
        tau = thinned_quantile_share(Additive(m=m, weights=(1.0,) * m), n, c, q).value
        agree &= tau == float(stats.binom.ppf(q, m, c / n))
        dev[m] = abs(tau / (m / n) - c)
    ok = agree and dev[240] <= 0.05 and dev[240] <= dev[60]
    report(4, ok, f"identical goods: deviation {dev[240]:.4f} at m=240, {dev[60]:.4f} at m=60, scipy agrees={agree}",
           time.perf_counter() - start, 1)


def test_05_threshold_window(report):
    start = time.perf_counter()
    m, n, c = 200, 2, 0.5
    q = math.exp(-c)
    want = {30: (1.0, 1.0), 70: (0.0, 1.0), 130: (0.0, 0.0)}
    got, oracle = {}, {}
    for T in want:
        v = Threshold(m=m, T=T)
        got[T] = (thinned_quantile_share(v, n, c, q).value, thinned_quantile_share(v, n, 1.0, q).value)
        # the 0/1 quantile is 1 exactly when P[|X| < T] < q
        oracle[T] = tuple(float(stats.binom.cdf(T - 1, m, a / n) < q) for a in (c, 1.0))
    report(5, got == want == oracle, f"threshold window (Q_c, Q_1): {got}", time.perf_counter() - start, 1)


def test_06_downset_inequality(report):
    start = time.perf_counter()
    family = [D for m in range(5) for D in all_downsets(m)]
    checks = 0
    worst = worst_diff = math.inf
    for D in family:
        for p in P_GRID:
            for a in ALPHA_GRID:
                worst = min(worst, check_downset_inequality(D, p, a))
                checks += 1
            worst_diff = min(worst_diff, check_differential_inequality(D, p, 1e-5))
    ok = checks >= 15_000 and worst >= -1e-12 and worst_diff >= -1e-6 and len(family) == 199
    report(6, ok, f"down-set inequality: {checks} checks on {len(family)} down-sets, min residual {worst:.3g}, "
           f"min differential residual {worst_diff:.3g}", time.perf_counter() - start, 30)


def _suite(number, name, limit, report, cases=None):
    rep = run_suite(name, seed=SEED, cases=cases)
    notes = f"; {rep.notes[0]}" if rep.notes else ""
    report(number, rep.passed, f"{name}: {rep.cases} checks, {rep.failures} failures{notes}", rep.wall_time, limit)
    return rep


def test_07_thinning_monotonicity(report):
    _suite(7, "monotonicity", 30, report, cases=1000)


def test_08_kruskal_katona(report):
    start = time.perf_counter()
    rep = run_suite("kk", seed=SEED, cases=10_000)
    tight = SetFamily.complete(3, 2)
    actual, bound = len(shadow(tight, 1)), kk_lower_bound(3, 2, 1)
    ok = rep.passed and actual == 3 and abs(bound - 3) <= 1e-9
    report(8, ok, f"Kruskal-Katona: {rep.cases} checks, {rep.failures} failures; C([3],2) t=1 bound {bound} actual {actual}",
           time.perf_counter() - start, 30)


def test_09_rainbow_emc(report):
    rep = _suite(9, "emc-tiny", 300, report)
    assert rep.cases == 5 * len(EMC_TUPLES)


def test_10_lemmas(report):
    start = time.perf_counter()
    pad = run_suite("padding", seed=SEED, cases=1000)
    red = run_suite("reduction", seed=SEED, cases=1000)
    ok = pad.passed and red.passed
    report(10, ok, f"padding {pad.cases} checks / {pad.failures} failures; 0/1 reduction {red.cases} checks / "
           f"{red.failures} failures", time.perf_counter() - start, 30)


def test_11_mc_calibration(report):
    _suite(11, "mc-vs-exact", 120, report, cases=1000)


def test_12_allocator_oracle(report):
    rep = _suite(12, "allocator-oracle", 120, report, cases=500)
    assert rep.cases >= 500


def test_13_theorem_regime(report):
    _suite(13, "theorem-regime", 60, report, cases=500)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
