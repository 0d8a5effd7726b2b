import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fairshare.errors import CapabilityError, DomainError, InstanceFormatError
from fairshare.extremal import (
    DownSet,
    SetFamily,
    all_downsets,
    best_cross_dependent,
    binom_real,
    check_differential_inequality,
    check_downset_inequality,
    construction_clique,
    construction_star,
    emc_bound,
    format_family,
    format_set,
    greedy_closure,
    is_cross_dependent,
    is_downset,
    kk_lower_bound,
    max_min_cross_dependent,
    mu,
    parse_families,
    parse_set,
    random_downset,
    shadow,
)
from fairshare.model import mask_of
from fairshare.randgen import random_monotone_table
from fairshare.shares import exact_distribution

P_GRID = [0.1 * i for i in range(1, 10)]


# down-sets and measures

def test_is_downset_examples():
    assert is_downset({0, 0b01, 0b10}, 2)
    assert not is_downset({0b01}, 2)
    assert is_downset(range(8), 3)


@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_downset_count_matches_brute_force(m):
    subsets = range(1 << m)
    brute = sum(
        is_downset({s for s in subsets if pick >> s & 1}, m) for pick in range(1 << (1 << m))
    )
    assert len(all_downsets(m)) == brute


def test_downset_count_m4():
    # Dedekind number M(4); each family distinct and closed
    ds = all_downsets(4)
    assert len(ds) == 168
    assert len({D.members for D in ds}) == 168


def test_mu_examples():
    assert mu(DownSet.full(3), 0.37) == 1.0
    assert mu(DownSet(2, {0}), 0.5) == pytest.approx(0.25)
    assert mu(DownSet(2, {0, 1, 2}), 0.5) == pytest.approx(0.75)


def test_downset_inequality_examples():
    D = DownSet(2, {0, 1, 2})
    r = check_downset_inequality(D, 0.5, 0.5)
    assert r == pytest.approx((1 - 0.25**2) - 0.75**0.5, abs=1e-15)
    assert r > 0.07
    assert check_downset_inequality(D, 0.3, 1.0) == 0.0
    assert check_downset_inequality(DownSet.full(3), 0.4, 0.2) == 0.0


def test_differential_examples():
    assert check_differential_inequality(DownSet.full(2), 0.5) == 0.0
    for p in P_GRID:
        want = p - (1 - p) * math.log(1 / (1 - p))
        assert check_differential_inequality(DownSet(1, {0}), p) == pytest.approx(want, abs=1e-8)
        assert want >= 0
    assert check_differential_inequality(DownSet(2, {0, 1, 2}), 0.5) > 0
    assert check_differential_inequality(DownSet(2, frozenset()), 0.5) == 0.0


def test_differential_rejects_large_step():
    with pytest.raises(DomainError):
        check_differential_inequality(DownSet.full(2), 0.5, h=1e-2)


@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.sampled_from(P_GRID), st.floats(0.05, 1.0))
def test_downset_inequality_random(seed, m, p, alpha):
    D = random_downset(m, np.random.default_rng(seed))
    assert check_downset_inequality(D, p, alpha) >= -1e-12


@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.sampled_from([0.1, 0.25, 0.5, 0.8]), st.data())
def test_mu_matches_distribution_cdf(seed, m, p, data):
    # the sublevel set {S : v(S) <= t} is a down-set; its measure is the CDF at t
    v = random_monotone_table(np.random.default_rng(seed), m)
    table = v.table()
    t = data.draw(st.sampled_from(sorted(set(table.tolist()))))
    D = DownSet(m, {s for s in range(1 << m) if table[s] <= t})
    assert mu(D, p) == pytest.approx(exact_distribution(v, p).cdf(t), abs=1e-12)


# shadows and Kruskal-Katona

def naive_shadow(F, t):
    return {mask_of(c) for s in F.members for c in itertools.combinations([i + 1 for i in range(F.M) if s >> i & 1], t)}


def test_shadow_examples():
    assert shadow(SetFamily.of(4, 2, [{1, 2}, {1, 3}]), 1) == SetFamily.of(4, 1, [{1}, {2}, {3}])
    assert len(shadow(SetFamily.complete(4, 2), 1)) == 4
    F = SetFamily.of(5, 3, [{1, 2, 3}, {2, 4, 5}])
    assert shadow(F, 3) == F


@given(st.integers(0, 2**32 - 1), st.integers(0, 3))
def test_shadow_matches_naive(seed, t):
    rng = np.random.default_rng(seed)
    universe = SetFamily.complete(6, 3).sorted_members()
    F = SetFamily(6, 3, frozenset(s for s in universe if rng.random() < 0.3))
    assert shadow(F, t).members == naive_shadow(F, t)


def test_binom_real_examples():
    assert binom_real(5, 2) == 10
    assert binom_real(2.5, 2) == pytest.approx(1.875)
    assert binom_real(4, 4) == 1
    assert binom_real(3.3, 0) == 1


def test_kk_examples():
    assert kk_lower_bound(3, 2, 1) == pytest.approx(3, abs=1e-9)
    for k in range(1, 5):
        for t in range(k + 1):
            assert kk_lower_bound(1, k, t) == pytest.approx(math.comb(k, t))
    assert kk_lower_bound(2, 2, 1) == pytest.approx((1 + math.sqrt(17)) / 2, rel=1e-10)
    with pytest.raises(DomainError):
        kk_lower_bound(0, 2, 1)


@given(st.integers(1, 200), st.integers(1, 5), st.data())
def test_kk_root_solves_equation(size, k, data):
    t = data.draw(st.integers(0, k))
    b = kk_lower_bound(size, k, t)
    # the bound at t = k recovers the size, and shrinking k to t cannot exceed the size
    assert kk_lower_bound(size, k, k) == pytest.approx(size, rel=1e-9)
    assert b >= 1 - 1e-12


@given(st.integers(0, 2**32 - 1))
def test_kk_holds_on_random_families(seed):
    rng = np.random.default_rng(seed)
    universe = SetFamily.complete(7, 3).sorted_members()
    F = SetFamily(7, 3, frozenset(s for s in universe if rng.random() < rng.random()))
    if len(F):
        for t in range(4):
            assert len(shadow(F, t)) >= kk_lower_bound(len(F), 3, t) - 1e-9


# cross-dependence and EMC

def test_cross_examples():
    C = SetFamily.complete(5, 2, mask_of([1, 2, 3]))
    assert is_cross_dependent([C, C]).dependent
    chk = is_cross_dependent([SetFamily.of(4, 2, [{1, 2}]), SetFamily.of(4, 2, [{3, 4}])])
    assert not chk.dependent and chk.witness == (0b0011, 0b1100)
    assert is_cross_dependent([SetFamily(4, 2, frozenset()), SetFamily.complete(4, 2)]).dependent


def test_cross_witness_order():
    big = SetFamily.complete(6, 2)
    small = SetFamily.of(6, 2, [{1, 2}])
    chk = is_cross_dependent([big, small])
    assert chk.witness[1] == mask_of([1, 2]) and chk.witness[0] & chk.witness[1] == 0


def test_cross_budget():
    fams = [SetFamily.complete(12, 2)] * 7
    with pytest.raises(CapabilityError):
        is_cross_dependent(fams, budget=100)


def test_emc_bound_examples():
    assert emc_bound(2, 2, 5) == 4
    assert emc_bound(3, 1, 3) == 2
    with pytest.raises(DomainError):
        emc_bound(1, 2, 5)
    with pytest.raises(DomainError):
        emc_bound(3, 2, 5)


@pytest.mark.parametrize("n,k,M", [(2, 2, 5), (2, 1, 3), (2, 2, 4), (3, 1, 5), (3, 2, 7), (2, 3, 8)])
def test_constructions(n, k, M):
    clique, star = construction_clique(n, k, M), construction_star(n, k, M)
    assert len(clique) == len(star) == n
    assert len(clique[0]) == math.comb(k * n - 1, k)
    assert len(star[0]) == math.comb(M, k) - math.comb(M - n + 1, k)
    assert is_cross_dependent(clique).dependent
    assert is_cross_dependent(star).dependent
    assert max(len(clique[0]), len(star[0])) == emc_bound(n, k, M)


def test_star_sizes_examples():
    assert len(construction_star(2, 2, 4)[0]) == 3
    assert len(construction_star(2, 2, 5)[0]) == 4
    assert construction_clique(2, 1, 3)[0] == SetFamily.of(3, 1, [{1}])


def naive_max_min(n, k, M):
    universe = SetFamily.complete(M, k).sorted_members()
    subsets = [frozenset(c) for r in range(len(universe) + 1) for c in itertools.combinations(universe, r)]
    best = 0
    for fams in itertools.product(subsets, repeat=n):
        low = min(len(f) for f in fams)
        if low > best and is_cross_dependent([SetFamily(M, k, f) for f in fams]).dependent:
            best = low
    return best


@pytest.mark.parametrize("n,k,M", [(2, 1, 3), (2, 1, 4), (3, 1, 3), (2, 2, 4)])
def test_max_min_matches_naive(n, k, M):
    assert max_min_cross_dependent(n, k, M) == naive_max_min(n, k, M)


@pytest.mark.parametrize("n,k,M,want", [(2, 2, 5, 4), (2, 1, 3, 1), (3, 1, 3, 2)])
def test_max_min_examples(n, k, M, want):
    best, fams = best_cross_dependent(n, k, M)
    assert best == want == emc_bound(n, k, M)
    assert is_cross_dependent(fams).dependent
    assert min(len(f) for f in fams) == best


def test_max_min_capability():
    with pytest.raises(CapabilityError):
        max_min_cross_dependent(2, 2, 7)


def test_greedy_closure_keeps_dependence():
    fams = [SetFamily.of(5, 2, [{1, 2}]), SetFamily.of(5, 2, [{1, 3}])]
    closed = greedy_closure(fams)
    assert is_cross_dependent(closed).dependent
    assert all(a.members <= b.members for a, b in zip(fams, closed))


# literals

def test_literals():
    fams = parse_families("M=5;k=2;F1=12,13,23;F2=12,13,23")
    assert len(fams) == 2 and fams[0] == SetFamily.complete(5, 2, mask_of([1, 2, 3]))
    assert format_family(fams[0]) == "12,13,23"
    assert parse_set("1.10") == mask_of([1, 10])
    assert format_set(mask_of([1, 10])) == "1.10"
    for bad in ["M=5;F1=12", "M=5;k=2;F2=12", "M=5;k=2;F1=1x", "M=5;k=2;F1=123", "M=5;k=2;F1=11"]:
        with pytest.raises(InstanceFormatError):
            parse_families(bad)
