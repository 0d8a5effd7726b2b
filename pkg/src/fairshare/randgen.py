"""Seeded generators of random monotone valuations for property checks."""

from __future__ import annotations

import numpy as np

from .model import Additive, Nonempty, Table, Threshold, TwoBlock, UnitDemand, Valuation, ZeroOneValuation, reduce_01


def _max_closure(raw: np.ndarray, m: int) -> np.ndarray:
    idx = np.arange(1 << m, dtype=np.int64)
    t = raw.copy()
    for j in range(m):
        with_j = (idx >> j) & 1 == 1
        t[with_j] = np.maximum(t[with_j], t[idx[with_j] ^ (1 << j)])
    return t


def _sum_closure(raw: np.ndarray, m: int) -> np.ndarray:
    idx = np.arange(1 << m, dtype=np.int64)
    t = raw.copy()
    for j in range(m):
        with_j = (idx >> j) & 1 == 1
        t[with_j] = t[with_j] + t[idx[with_j] ^ (1 << j)]
    return t


def random_monotone_table(rng: np.random.Generator, m: int, levels: int = 4) -> Table:
    """Monotone table from random small integer bumps.

    Half the time values are the running maximum of the bumps over subsets
    (many ties), otherwise their sum over subsets (many distinct values).
    """
    raw = rng.integers(0, levels + 1, size=1 << m).astype(np.float64)
    raw[0] = 0.0
    if rng.random() < 0.5:
        t = _max_closure(raw, m)
    else:
        raw[rng.random(1 << m) < 0.6] = 0.0
        t = _sum_closure(raw, m)
    return Table.from_array(t)


def random_zero_one(
    rng: np.random.Generator, m: int, max_generators: int | None = None, singleton_bias: float = 0.0
) -> ZeroOneValuation:
    """Up-closure of a few random nonempty generator sets.

    ``singleton_bias`` is the chance that a generator is a single good.
    """
    k = int(rng.integers(0, (max_generators or m + 2) + 1))
    raw = np.zeros(1 << m)
    for _ in range(k):
        size = 1 if rng.random() < singleton_bias else int(rng.integers(1, m + 1))
        goods = rng.choice(m, size=size, replace=False)
        raw[int(np.sum(1 << goods))] = 1.0
    if not raw.any():
        return ZeroOneValuation(m=m, minimal=frozenset())
    return reduce_01(Table.from_array(_max_closure(raw, m)), 1.0)


def random_valuation(rng: np.random.Generator, m: int) -> Valuation:
    """A random valuation of any kind on ``[m]``."""
    kind = int(rng.integers(0, 7))
    if kind == 0:
        return Additive(m=m, weights=tuple(float(x) for x in rng.integers(0, 4, size=m)))
    if kind == 1:
        return UnitDemand(m=m, weights=tuple(float(x) for x in rng.integers(0, 4, size=m)))
    if kind == 2:
        return Threshold(m=m, T=int(rng.integers(1, m + 1)))
    if kind == 3:
        return Nonempty(m=m)
    if kind == 4 and m >= 2:
        perm = rng.permutation(m) + 1
        cut = int(rng.integers(1, m))
        return TwoBlock.from_goods(m, perm[:cut].tolist(), perm[cut:].tolist())
    if kind == 5:
        return random_zero_one(rng, m)
    return random_monotone_table(rng, m)
