"""Scripted worked examples behind ``fairshare repro``.

Asymptotic statements are pinned to explicit finite parameters.  Expected
values come from independent routes at run time (binomial CDF search,
exact fractions, brute force); the only literals are exact 0/1 shares and
floor(m/n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from .allocator import brute_force_allocation, find_fair_allocation
from .model import Additive, Nonempty, Threshold, TwoBlock
from .randgen import random_monotone_table, random_zero_one
from .shares import binom_cdf, exact_distribution, mms, rmms, thinned_quantile_share
from .verify import thinning_violations


@dataclass(frozen=True)
class ReproCase:
    id: str
    description: str
    expected: dict[str, Any]
    actual: dict[str, Any]

    @property
    def passed(self) -> bool:
        return self.expected == self.actual


def binomial_quantile(trials: int, p: float, q: float) -> int:
    """Smallest ``k`` with ``P[Bin(trials, p) <= k] >= q``, by direct CDF search."""
    for k in range(trials + 1):
        if binom_cdf(trials, p, k) >= q - 1e-12:
            return k
    return trials


def _identical_goods() -> ReproCase:
    n, c, q = 3, 0.5, math.exp(-1)
    dev = {}
    agree = True
    for m in (60, 240):
        tau = thinned_quantile_share(Additive(m=m, weights=(1.0,) * m), n, c, q).value
        agree &= tau == binomial_quantile(m, c / n, q)
        dev[m] = abs(tau / (m / n) - c)
    return ReproCase(
        "identical-goods",
        "v(T)=|T|, n=3, c=1/2, q=1/e: thinned share over m/n approaches c",
        {"within_0.05_at_240": True, "no_worse_than_m60": True, "matches_binomial_quantile": True},
        {
            "within_0.05_at_240": dev[240] <= 0.05,
            "no_worse_than_m60": dev[240] <= dev[60],
            "matches_binomial_quantile": bool(agree),
        },
    )


def _threshold_window() -> ReproCase:
    m, n, c = 200, 2, 0.5
    q = math.exp(-c)

    def by_cdf(T: int, a: float) -> int:
        # a 0/1 quantile is 1 exactly when P[value 0] < q
        return int(binom_cdf(m, a / n, T - 1) < q - 1e-12)

    actual, oracle = {}, {}
    for T in (30, 70, 130):
        v = Threshold(m=m, T=T)
        actual[f"T={T}"] = (thinned_quantile_share(v, n, c, q).value, thinned_quantile_share(v, n, 1.0, q).value)
        oracle[f"T={T}"] = (float(by_cdf(T, c)), float(by_cdf(T, 1.0)))
    expected = {"T=30": (1.0, 1.0), "T=70": (0.0, 1.0), "T=130": (0.0, 0.0)}
    return ReproCase(
        "threshold-window",
        "u_T(S)=1{|S|>=T}, m=200, n=2, c=1/2: (Q_c, Q_1) below, inside and above the window",
        {"shares": expected, "oracle_agrees": True},
        {"shares": actual, "oracle_agrees": actual == oracle},
    )


def _rmms_identical() -> ReproCase:
    expected, actual = {}, {}
    for n in (1, 2, 3):
        for m in range(1, 9):
            v = Additive(m=m, weights=(1.0,) * m)
            expected[f"m={m},n={n}"] = (float(m // n), float(m // n))
            actual[f"m={m},n={n}"] = (rmms(v, n).value, mms(v, n).value)
    return ReproCase("rmms-identical", "v(T)=|T|: RMMS = MMS = floor(m/n) for m <= 8, n <= 3", expected, actual)


def _complementarity() -> ReproCase:
    a, n = 3, 2
    v = TwoBlock.from_goods(2 * a, range(1, a + 1), range(a + 1, 2 * a + 1))
    p_zero = 1 - (1 - (1 - Fraction(1, n)) ** a) ** 2
    d = exact_distribution(v, 1 / n, method="enumerate")
    return ReproCase(
        "complementarity",
        "red/blue complements, a=3, n=2: RMMS = 0 while the 1/e-quantile share is 1",
        {"rmms": 0.0, "quantile_1/e": 1.0, "P[v=0]": "15/64", "P[v=0]<1/e": True},
        {
            "rmms": rmms(v, n).value,
            "quantile_1/e": thinned_quantile_share(v, n, 1.0, math.exp(-1)).value,
            "P[v=0]": str(p_zero) if abs(d.probs[0] - float(p_zero)) <= 1e-15 else repr(d.probs[0]),
            "P[v=0]<1/e": float(p_zero) < math.exp(-1),
        },
    )


def _upper_bound() -> ReproCase:
    n, m = 3, 2
    profile = [Nonempty(m=m)] * n
    shares = [thinned_quantile_share(v, n, 1.0, 0.5).value for v in profile]
    return ReproCase(
        "upper-bound",
        "n=3 agents, m=2 goods, v=1{T nonempty}, c=1, q=1/2: every share is 1, no fair allocation",
        {"shares": [1.0, 1.0, 1.0], "search": "INFEASIBLE", "brute_force": "INFEASIBLE", "P[v=0]<q": True},
        {
            "shares": shares,
            "search": "FEASIBLE" if find_fair_allocation(profile, shares) else "INFEASIBLE",
            "brute_force": "FEASIBLE" if brute_force_allocation(profile, shares) else "INFEASIBLE",
            "P[v=0]<q": (1 - 1 / n) ** m < 0.5,
        },
    )


def _monotonicity(seed: int = 0) -> ReproCase:
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(200):
        v = random_monotone_table(rng, int(rng.integers(1, 6)))
        bad += bool(thinning_violations(v, int(rng.integers(2, 5))))
    return ReproCase(
        "monotonicity",
        "thinned shares: tau_q^(c) <= tau_{q^(c'/c)}^(c') on 200 random monotone tables",
        {"violations": 0},
        {"violations": bad},
    )


def _alpha_scaling(seed: int = 0) -> ReproCase:
    rng = np.random.default_rng(seed)
    changed = 0
    for _ in range(200):
        u = random_zero_one(rng, int(rng.integers(1, 7)))
        tau = thinned_quantile_share(u, 2, 1.0, float(rng.uniform(0.05, 0.95))).value
        table = u.table()
        for alpha in np.linspace(0.05, 1.0, 20):
            changed += not np.array_equal(table >= alpha * tau, table >= tau)
    return ReproCase(
        "alpha-scaling",
        "0/1 valuations: benchmark alpha*tau_q accepts exactly the bundles tau_q accepts",
        {"changed_acceptance_sets": 0},
        {"changed_acceptance_sets": changed},
    )


CASES: dict[str, Callable[[], ReproCase]] = {
    "identical-goods": _identical_goods,
    "threshold-window": _threshold_window,
    "rmms-identical": _rmms_identical,
    "complementarity": _complementarity,
    "upper-bound": _upper_bound,
    "monotonicity": _monotonicity,
    "alpha-scaling": _alpha_scaling,
}


def run_case(case_id: str) -> ReproCase:
    if case_id not in CASES:
        raise KeyError(case_id)
    return CASES[case_id]()
