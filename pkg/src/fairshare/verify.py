"""Seeded property suites behind ``fairshare verify``.

Each suite returns a :class:`SuiteReport`; a suite passes iff it records
no failures.  Case counts default to the sizes the acceptance tests use and
can be lowered for quick runs.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .allocator import brute_force_allocation, feasibility_report, search_allocation, verify_allocation
from .extremal import (
    SetFamily,
    all_downsets,
    check_differential_inequality,
    check_downset_inequality,
    construction_clique,
    construction_star,
    emc_bound,
    is_cross_dependent,
    kk_lower_bound,
    max_min_cross_dependent,
    random_downset,
    shadow,
)
from .instance import Instance
from .model import Nonempty, pad, reduce_01
from .randgen import random_monotone_table, random_valuation, random_zero_one
from .shares import (
    ShareSpec,
    exact_distribution,
    left_quantile,
    mc_quantile_bracket,
    thinned_quantile_share,
    thinning_budget,
)

P_GRID = [round(0.1 * i, 1) for i in range(1, 10)]
ALPHA_GRID = [round(0.1 * i, 1) for i in range(1, 11)]
C_GRID = ALPHA_GRID
Q_GRID = P_GRID


@dataclass
class SuiteReport:
    suite: str
    seed: int
    cases: int = 0
    failures: int = 0
    wall_time: float = 0.0
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def check(self, ok: bool, message: str) -> None:
        self.cases += 1
        if not ok:
            self.failures += 1
            if len(self.notes) < 20:
                self.notes.append(message)


def suite_downset(report: SuiteReport, rng: np.random.Generator, cases: int | None, budget: int | None) -> None:
    families = [D for m in range(5) for D in all_downsets(m)]
    families += [random_downset(m, rng) for m in (5, 6) for _ in range(cases or 50)]
    for D in families:
        for p in P_GRID:
            for a in ALPHA_GRID:
                r = check_downset_inequality(D, p, a)
                report.check(r >= -1e-12, f"down-set inequality residual {r} (m={D.m}, |D|={len(D)}, p={p}, alpha={a})")
            r = check_differential_inequality(D, p, 1e-5)
            report.check(r >= -1e-6, f"differential residual {r} (m={D.m}, |D|={len(D)}, p={p})")


def suite_kk(report: SuiteReport, rng: np.random.Generator, cases: int | None, budget: int | None) -> None:
    universe = SetFamily.complete(6, 3).sorted_members()
    for _ in range(cases or 10_000):
        keep = rng.random(len(universe)) < rng.random()
        sets = [s for s, b in zip(universe, keep) if b]
        if not sets:
            continue
        F = SetFamily(6, 3, frozenset(sets))
        for t in range(4):
            size = len(shadow(F, t))
            bound = kk_lower_bound(len(F), 3, t)
            report.check(size >= bound - 1e-9, f"|shadow_{t}| = {size} < {bound} for |F| = {len(F)}")
        sub = SetFamily(6, 3, frozenset(s for s in sets if rng.random() < 0.5))
        report.check(
            all(shadow(sub, t).members <= shadow(F, t).members for t in range(4)),
            "shadow is not monotone under inclusion",
        )
    tight = SetFamily.complete(3, 2)
    report.check(len(shadow(tight, 1)) == 3 and abs(kk_lower_bound(3, 2, 1) - 3) <= 1e-9, "KK not tight on C([3],2)")


def thinning_violations(v, n: int) -> list[str]:
    """All violations of the thinning-monotonicity inequalities for one valuation."""
    dists = {c: exact_distribution(v, c / n) for c in C_GRID}
    out = []
    for i, c in enumerate(C_GRID):
        for c2 in C_GRID[i:]:
            for q in Q_GRID:
                lhs = left_quantile(dists[c], q).value
                rhs = left_quantile(dists[c2], q ** (c2 / c)).value
                if lhs > rhs:
                    out.append(f"tau_{q}^({c}) = {lhs} > tau_{q ** (c2 / c):.6g}^({c2}) = {rhs}")
            lhs = left_quantile(dists[c], math.exp(-c)).value
            rhs = left_quantile(dists[c2], math.exp(-c2)).value
            if lhs > rhs:
                out.append(f"tau_e^-{c}^({c}) = {lhs} > tau_e^-{c2}^({c2}) = {rhs}")
    return out


def suite_monotonicity(report: SuiteReport, rng: np.random.Generator, cases: int | None, budget: int | None) -> None:
    for _ in range(cases or 1000):
        v = random_monotone_table(rng, int(rng.integers(1, 6)))
        n = int(rng.integers(2, 5))
        bad = thinning_violations(v, n)
        report.check(not bad, f"n={n}: {bad[:1]}")


def suite_padding(report: SuiteReport, rng: np.random.Generator, cases: int | None, budget: int | None) -> None:
    for _ in range(cases or 300):
        m = int(rng.integers(1, 5))
        v = random_valuation(rng, m)
        M = int(rng.integers(m, 11))
        w = pad(v, M)
        n = int(rng.integers(2, 5))
        c, q = float(rng.choice(C_GRID)), float(rng.choice(Q_GRID))
        a = thinned_quantile_share(v, n, c, q).value
        b = thinned_quantile_share(w, n, c, q).value
        report.check(a == b, f"padding {v.kind} m={m} -> M={M}: {a} != {b}")


def suite_reduction(report: SuiteReport, rng: np.random.Generator, cases: int | None, budget: int | None) -> None:
    done = 0
    while done < (cases or 1000):
        m = int(rng.integers(1, 7))
        v = random_valuation(rng, m) if rng.random() < 0.5 else random_monotone_table(rng, m)
        n = int(rng.integers(2, 5))
        c, q = float(rng.choice(C_GRID)), float(rng.choice(Q_GRID))
        tau = thinned_quantile_share(v, n, c, q).value
        if tau <= 0:
            continue
        done += 1
        u = reduce_01(v, tau)
        got = thinned_quantile_share(u, n, c, q).value
        report.check(got == 1.0, f"reduction of {v.kind} at tau={tau} has share {got}")
        # scaling the benchmark of a 0/1 valuation does not change who accepts what
        alpha = float(rng.uniform(0.01, 1.0))
        table = u.table()
        report.check(
            bool(np.array_equal(table >= alpha * got, table >= got)),
            f"alpha-scaling changed the accepted family (alpha={alpha})",
        )


def suite_mc_vs_exact(report: SuiteReport, rng: np.random.Generator, cases: int | None, budget: int | None) -> None:
    seeds = cases or 1000
    v, n, c, q = Nonempty(m=2), 3, 1.0, 0.5
    exact = thinned_quantile_share(v, n, c, q).value
    hits = sum(exact in mc_quantile_bracket(v, n, c, q, 0.01, 0.001, seed) for seed in range(seeds))
    report.check(hits >= 0.99 * seeds, f"upper-bound instance: bracket held in {hits}/{seeds} seeds")
    report.notes.append(f"coverage {hits}/{seeds} on the upper-bound instance")
    for _ in range(5):
        m = int(rng.integers(1, 7))
        v = random_valuation(rng, m)
        exact = thinned_quantile_share(v, 2, 1.0, 0.5).value
        runs = max(20, seeds // 20)
        hits = sum(exact in mc_quantile_bracket(v, 2, 1.0, 0.5, 0.05, 0.01, int(s)) for s in rng.integers(0, 2**63, size=runs))
        report.check(hits >= 0.9 * runs, f"{v.kind} m={m}: bracket held in {hits}/{runs} runs")


EMC_TUPLES = [(2, 1, M) for M in range(3, 7)] + [(3, 1, M) for M in range(3, 7)] + [(4, 1, M) for M in range(4, 7)] + [(2, 2, 5)]


def suite_emc_tiny(report: SuiteReport, rng: np.random.Generator, cases: int | None, budget: int | None) -> None:
    for n, k, M in EMC_TUPLES:
        bound = emc_bound(n, k, M)
        best = max_min_cross_dependent(n, k, M, **({"budget": budget} if budget else {}))
        report.check(best == bound, f"({n},{k},{M}): max-min {best} != bound {bound}")
        clique, star = construction_clique(n, k, M), construction_star(n, k, M)
        report.check(is_cross_dependent(clique).dependent, f"({n},{k},{M}): clique construction not cross-dependent")
        report.check(is_cross_dependent(star).dependent, f"({n},{k},{M}): star construction not cross-dependent")
        report.check(len(clique[0]) == math.comb(k * n - 1, k), f"({n},{k},{M}): clique size")
        report.check(len(star[0]) == math.comb(M, k) - math.comb(M - n + 1, k), f"({n},{k},{M}): star size")


def random_thresholds(rng: np.random.Generator, profile) -> list[float]:
    out = []
    for v in profile:
        levels = np.unique(v.table())
        out.append(float(rng.choice(levels)) if rng.random() < 0.8 else 0.0)
    return out


def suite_allocator_oracle(report: SuiteReport, rng: np.random.Generator, cases: int | None, budget: int | None) -> None:
    for _ in range(cases or 500):
        n, m = int(rng.integers(2, 4)), int(rng.integers(1, 9))
        profile = [random_valuation(rng, m) for _ in range(n)]
        thresholds = random_thresholds(rng, profile)
        alloc, _ = search_allocation(profile, thresholds, budget)
        oracle = brute_force_allocation(profile, thresholds)
        report.check((alloc is None) == (oracle is None), f"n={n} m={m}: search and brute force disagree")
        if alloc is not None:
            report.check(verify_allocation(profile, thresholds, alloc), "returned allocation fails verification")


def suite_theorem_regime(report: SuiteReport, rng: np.random.Generator, cases: int | None, budget: int | None) -> None:
    c = thinning_budget(3).fallback_c
    share = ShareSpec.thinned_quantile(c, math.exp(-c))
    active = 0
    for _ in range(cases or 500):
        m = int(rng.integers(1, 7))
        profile = tuple(random_zero_one(rng, m, max_generators=2 * m, singleton_bias=0.6) for _ in range(3))
        rep = feasibility_report(Instance(3, m, profile, share), budget)
        active += sum(s.value > 0 for s in rep.shares)
        report.check(rep.feasible, f"infeasible profile at m={m}: {[sorted(u.minimal) for u in profile]}")
    report.notes.append(f"{active} active agents across the profiles")


SUITES: dict[str, Callable] = {
    "downset": suite_downset,
    "kk": suite_kk,
    "monotonicity": suite_monotonicity,
    "padding": suite_padding,
    "reduction": suite_reduction,
    "mc-vs-exact": suite_mc_vs_exact,
    "emc-tiny": suite_emc_tiny,
    "allocator-oracle": suite_allocator_oracle,
    "theorem-regime": suite_theorem_regime,
}


def run_suite(name: str, seed: int = 0, cases: int | None = None, budget: int | None = None) -> SuiteReport:
    if name not in SUITES:
        raise KeyError(name)
    report = SuiteReport(name, seed)
    start = time.perf_counter()
    SUITES[name](report, np.random.default_rng(seed), cases, budget)
    report.wall_time = time.perf_counter() - start
    return report
