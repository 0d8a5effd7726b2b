"""Share benchmarks: thinned quantile shares, proportional share, MMS and RMMS.

The random benchmark bundle includes each good independently with
probability ``p = c / n``.  Its value law is computed exactly, either by
enumerating ``2^m`` subsets or through a closed form for the kinds that
admit one (threshold, nonempty, two-block, integer additive).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import CapabilityError, DomainError
from .model import (
    MAX_SCAN_GOODS,
    Additive,
    Nonempty,
    Threshold,
    TwoBlock,
    UnitDemand,
    Valuation,
    full_mask,
    popcounts,
)

QUANTILE_TOL = 1e-12
MERGE_RTOL = 1e-12
MMS_BUDGET = 10**8
RMMS_MAX_GOODS = 8
RMMS_MAX_AGENTS = 3
ADDITIVE_DP_MAX_TOTAL = 10**7
UNIVERSAL_THINNING = 1 / 250
LARGE_N_MIN_AGENTS = 10**7 + 2


@dataclass(frozen=True)
class ShareSpec:
    """Which benchmark to compute.  ``c`` and ``q`` only matter for thinned quantiles."""

    kind: str
    c: float = 1.0
    q: float = 0.5

    KINDS = ("thinned_quantile", "proportional", "mms", "rmms")

    def __post_init__(self) -> None:
        if self.kind not in self.KINDS:
            raise DomainError(f"unknown share kind {self.kind!r}")
        if self.kind == "thinned_quantile":
            if not 0 < self.c <= 1:
                raise DomainError(f"thinning c must lie in (0, 1], got {self.c}")
            if not 0 < self.q < 1:
                raise DomainError(f"quantile q must lie in (0, 1), got {self.q}")

    @classmethod
    def thinned_quantile(cls, c: float, q: float) -> ShareSpec:
        return cls("thinned_quantile", float(c), float(q))

    @classmethod
    def quantile(cls, q: float) -> ShareSpec:
        return cls("thinned_quantile", 1.0, float(q))

    def to_json(self) -> dict:
        if self.kind == "thinned_quantile":
            return {"kind": self.kind, "c": self.c, "q": self.q}
        return {"kind": self.kind}


@dataclass(frozen=True)
class ValueDistribution:
    """Exact law of ``v(X)``: strictly increasing support and matching probabilities."""

    support: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.support) != len(self.probs) or not self.support:
            raise DomainError("distribution needs a nonempty support with one probability per value")
        if any(b <= a for a, b in zip(self.support, self.support[1:])):
            raise DomainError("support must be strictly increasing")
        if any(p < 0 for p in self.probs):
            raise DomainError("probabilities must be nonnegative")
        if abs(math.fsum(self.probs) - 1.0) > 1e-9:
            raise DomainError(f"probabilities sum to {math.fsum(self.probs)!r}, not 1")

    def cdf(self, t: float) -> float:
        return math.fsum(p for x, p in zip(self.support, self.probs) if x <= t)

    def as_dict(self) -> dict[float, float]:
        return dict(zip(self.support, self.probs))

    def to_csv(self) -> str:
        rows = ["value,probability"]
        rows += [f"{x:.17g},{p:.17g}" for x, p in zip(self.support, self.probs)]
        return "\n".join(rows) + "\n"


@dataclass(frozen=True)
class ShareValue:
    value: float
    attained: bool


@dataclass(frozen=True)
class QuantileBracket:
    """Monte Carlo bracket ``[lo, hi]`` holding the true quantile with probability >= 1 - delta."""

    lo: float
    hi: float
    q: float
    epsilon: float
    delta: float
    samples: int
    seed: int

    def __contains__(self, t: float) -> bool:
        return self.lo <= t <= self.hi


def _check_probability(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"inclusion probability must lie in [0, 1], got {p}")
    return p


def binom_pmf(trials: int, p: float) -> list[float]:
    """``P[Bin(trials, p) = k]`` for ``k = 0..trials`` by the ratio recurrence."""
    p = _check_probability(p)
    if trials < 0:
        raise DomainError(f"trial count must be nonnegative, got {trials}")
    if p == 0.0:
        return [1.0] + [0.0] * trials
    if p == 1.0:
        return [0.0] * trials + [1.0]
    log_first = trials * math.log1p(-p)
    if log_first > -700.0:
        terms = [math.exp(log_first)]
        ratio = p / (1.0 - p)
        for k in range(trials):
            terms.append(terms[-1] * (trials - k) / (k + 1) * ratio)
        return terms
    # (1-p)^trials underflows; evaluate each term in log space instead
    lp, lq = math.log(p), math.log1p(-p)
    lg = math.lgamma(trials + 1)
    return [
        math.exp(lg - math.lgamma(k + 1) - math.lgamma(trials - k + 1) + k * lp + (trials - k) * lq)
        for k in range(trials + 1)
    ]


def binom_cdf(trials: int, p: float, k: int) -> float:
    """``P[Bin(trials, p) <= k]``, summing terms in ascending order."""
    p = _check_probability(p)
    if not 0 <= k <= trials:
        raise DomainError(f"need 0 <= k <= trials, got k={k}, trials={trials}")
    if k == trials:
        return 1.0
    return min(1.0, math.fsum(binom_pmf(trials, p)[: k + 1]))


def _binom_cdf_clamped(trials: int, p: float, k: int) -> float:
    if k < 0:
        return 0.0
    if k >= trials:
        return 1.0
    return binom_cdf(trials, p, k)


def _from_atoms(values: np.ndarray, probs: np.ndarray) -> ValueDistribution:
    """Group equal (to 1e-12 relative) values and sum their probabilities."""
    uniq, inverse = np.unique(values, return_inverse=True)
    cluster = np.zeros(len(uniq), dtype=np.int64)
    reps = [uniq[0]]
    for i in range(1, len(uniq)):
        if uniq[i] - uniq[i - 1] <= MERGE_RTOL * abs(uniq[i]):
            cluster[i] = cluster[i - 1]
        else:
            cluster[i] = cluster[i - 1] + 1
            reps.append(uniq[i])
    mass = np.bincount(cluster[inverse.ravel()], weights=probs, minlength=len(reps))
    keep = [i for i in range(len(reps)) if mass[i] > 0.0] or [0]
    return ValueDistribution(tuple(float(reps[i]) for i in keep), tuple(float(mass[i]) for i in keep))


def _enumerated_distribution(v: Valuation, p: float) -> ValueDistribution:
    if v.m > MAX_SCAN_GOODS:
        raise CapabilityError(f"no closed form for kind {v.kind!r} and m={v.m} > {MAX_SCAN_GOODS}")
    sizes = popcounts(v.m)
    # p**k * (1-p)**(m-k) with 0**0 == 1
    by_size = np.array([p**k * (1.0 - p) ** (v.m - k) for k in range(v.m + 1)])
    return _from_atoms(v.table(), by_size[sizes])


def _integer_weights(v: Valuation) -> bool:
    return isinstance(v, Additive) and all(w == int(w) for w in v.weights) and sum(v.weights) <= ADDITIVE_DP_MAX_TOTAL


def _closed_form_distribution(v: Valuation, p: float) -> ValueDistribution | None:
    m = v.m
    if isinstance(v, Threshold):
        zero = _binom_cdf_clamped(m, p, v.T - 1)
        return _from_atoms(np.array([0.0, 1.0]), np.array([zero, 1.0 - zero]))
    if isinstance(v, Nonempty):
        zero = (1.0 - p) ** m
        return _from_atoms(np.array([0.0, 1.0]), np.array([zero, 1.0 - zero]))
    if isinstance(v, TwoBlock):
        hit = (1.0 - (1.0 - p) ** v.red.bit_count()) * (1.0 - (1.0 - p) ** v.blue.bit_count())
        return _from_atoms(np.array([0.0, 1.0]), np.array([1.0 - hit, hit]))
    if isinstance(v, Additive) and len(set(v.weights)) == 1:
        w = v.weights[0]
        return _from_atoms(w * np.arange(m + 1, dtype=np.float64), np.array(binom_pmf(m, p)))
    if _integer_weights(v):
        dp = np.zeros(int(sum(v.weights)) + 1)
        dp[0] = 1.0
        top = 0
        for w in (int(x) for x in v.weights):
            nxt = dp * (1.0 - p)
            nxt[w : top + w + 1] += p * dp[: top + 1]
            dp, top = nxt, top + w
        return _from_atoms(np.arange(len(dp), dtype=np.float64), dp)
    return None


def exact_distribution(v: Valuation, p: float, method: str = "auto") -> ValueDistribution:
    """Law of ``v(X)`` where ``X`` contains each good independently with probability ``p``.

    ``method`` is ``"auto"`` (closed form when available), ``"enumerate"``
    (always scan ``2^m`` subsets) or ``"closed_form"`` (fail if none exists).
    """
    p = _check_probability(p)
    if method == "enumerate":
        return _enumerated_distribution(v, p)
    if method not in ("auto", "closed_form"):
        raise DomainError(f"unknown method {method!r}")
    d = _closed_form_distribution(v, p)
    if d is not None:
        return d
    if method == "closed_form":
        raise CapabilityError(f"kind {v.kind!r} has no closed-form distribution")
    return _enumerated_distribution(v, p)


def left_quantile(d: ValueDistribution, q: float) -> ShareValue:
    """Smallest support value whose CDF reaches ``q`` (within 1e-12)."""
    acc = 0.0
    for x, pr in zip(d.support, d.probs):
        acc += pr
        if acc >= q - QUANTILE_TOL:
            return ShareValue(x, True)
    return ShareValue(d.support[-1], True)


def _check_agents(n: int, low: int = 2) -> None:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < low:
        raise DomainError(f"agent count must be an integer >= {low}, got {n!r}")


def thinned_quantile_share(v: Valuation, n: int, c: float, q: float) -> ShareValue:
    """Left ``q``-quantile of ``v(X)`` with inclusion probability ``c / n``."""
    _check_agents(n)
    ShareSpec.thinned_quantile(c, q)
    return left_quantile(exact_distribution(v, c / n), q)


def quantile_share(v: Valuation, n: int, q: float) -> ShareValue:
    return thinned_quantile_share(v, n, 1.0, q)


def _is_attained(v: Valuation, t: float) -> bool:
    if t == 0.0:
        return True
    if isinstance(v, (Threshold, Nonempty, TwoBlock)):
        return t == 1.0
    if isinstance(v, UnitDemand):
        return t in v.weights
    if v.m <= MAX_SCAN_GOODS:
        return bool(np.any(v.table() == t))
    if _integer_weights(v) and t == int(t):
        reach = 1
        for w in v.weights:
            reach |= reach << int(w)
        return bool(reach >> int(t) & 1)
    # attainment unknown without a 2^m scan; report conservatively
    return False


def proportional_share(v: Valuation, n: int) -> ShareValue:
    _check_agents(n, low=1)
    t = v.value(full_mask(v.m)) / n
    return ShareValue(t, _is_attained(v, t))


def _mms_value(values: Sequence[float], ground: int, n: int) -> float:
    """Best worst-bundle value over partitions of ``ground`` into ``n`` bundles.

    Bundles are unlabelled, so goods are assigned in restricted-growth order
    (a new bundle is only opened after the previous ones).  A branch is cut
    when even handing every unassigned good to each bundle cannot beat the
    incumbent.
    """
    goods = [1 << j for j in range(ground.bit_length()) if ground >> j & 1]
    if n == 1:
        return values[ground]
    best = -1.0
    bundles = [0] * n

    def rec(i: int, used: int, rest: int) -> None:
        nonlocal best
        bound = min(values[b | rest] for b in bundles)
        if bound <= best:
            return
        if i == len(goods):
            best = bound
            return
        g = goods[i]
        for j in range(min(used + 1, n)):
            bundles[j] |= g
            rec(i + 1, max(used, j + 1), rest & ~g)
            bundles[j] &= ~g

    rec(0, 0, ground)
    return max(best, 0.0)


def mms(v: Valuation, n: int) -> ShareValue:
    """Maximin share by exhaustive partition search (requires ``n^m <= 1e8``)."""
    _check_agents(n, low=1)
    if n == 1:
        return ShareValue(v.value(full_mask(v.m)), True)
    if n**v.m > MMS_BUDGET:
        raise CapabilityError(f"MMS enumeration needs n^m = {n}^{v.m} > {MMS_BUDGET:.0e} partitions")
    values = v.table().tolist()
    return ShareValue(_mms_value(values, full_mask(v.m), n), True)


def _check_rmms(v: Valuation, n: int) -> None:
    _check_agents(n, low=1)
    if v.m > RMMS_MAX_GOODS or n > RMMS_MAX_AGENTS:
        raise CapabilityError(
            f"residual feasibility is doubly exponential; limited to m <= {RMMS_MAX_GOODS}, "
            f"n <= {RMMS_MAX_AGENTS} (got m={v.m}, n={n})"
        )


def _residual_checker(values: Sequence[float], m: int, n: int, t: float):
    full = full_mask(m)

    @lru_cache(maxsize=None)
    def packable(ground: int, parts: int) -> bool:
        # with monotone v, partitioning into parts >= t equals packing disjoint parts >= t
        if parts == 0:
            return True
        if values[ground] < t:
            return False
        low = ground & -ground
        if packable(ground & ~low, parts):
            return True
        rest = ground & ~low
        sub = rest
        while True:
            s = sub | low
            if values[s] >= t and packable(ground & ~s, parts - 1):
                return True
            if sub == 0:
                return False
            sub = (sub - 1) & rest

    bad = [s for s in range(1, full + 1) if values[s] < t]

    def feasible() -> bool:
        seen: set[tuple[int, int]] = set()

        def rec(start: int, removed: int, k: int) -> bool:
            if (removed, k) not in seen:
                seen.add((removed, k))
                if not packable(full & ~removed, n - k):
                    return False
            if k == n - 1:
                return True
            for idx in range(start, len(bad)):
                s = bad[idx]
                if s & removed == 0 and not rec(idx + 1, removed | s, k + 1):
                    return False
            return True

        return rec(0, 0, 0)

    return feasible


def residually_self_feasible(v: Valuation, n: int, t: float) -> bool:
    """Whether every removal of ``k < n`` disjoint bundles worth less than ``t``
    leaves goods that split into ``n - k`` bundles worth at least ``t``."""
    _check_rmms(v, n)
    if t <= 0:
        return True
    return _residual_checker(v.table().tolist(), v.m, n, t)()


def rmms(v: Valuation, n: int) -> ShareValue:
    """Residual maximin share.

    Feasibility is monotone in ``t`` and constant between consecutive values
    of ``v``, so the supremum is the largest feasible value level; it is
    located by bisection over the sorted levels.
    """
    _check_rmms(v, n)
    values = v.table().tolist()
    levels = sorted({x for x in values if x > 0})
    lo, hi = -1, len(levels) - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if _residual_checker(values, v.m, n, levels[mid])():
            lo = mid
        else:
            hi = mid - 1
    return ShareValue(levels[lo] if lo >= 0 else 0.0, True)


def compute_share(v: Valuation, n: int, spec: ShareSpec) -> ShareValue:
    if spec.kind == "thinned_quantile":
        return thinned_quantile_share(v, n, spec.c, spec.q)
    if spec.kind == "proportional":
        return proportional_share(v, n)
    if spec.kind == "mms":
        return mms(v, n)
    return rmms(v, n)


MC_BLOCK = 4096


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("FAIRSHARE_THREADS", "1")))
    except ValueError:
        return 1


def mc_sample_count(epsilon: float, delta: float) -> int:
    """DKW sample size ``ceil(ln(2/delta) / (2 epsilon^2))``."""
    return math.ceil(math.log(2.0 / delta) / (2.0 * epsilon**2))


def mc_values(v: Valuation, p: float, samples: int, seed: int, threads: int = 1) -> np.ndarray:
    """Values of ``samples`` independent random bundles.

    Sample ``s`` lives in block ``s // 4096`` whose generator is Philox keyed
    by ``seed`` and jumped ``block`` times, so every sample is a pure function
    of ``(seed, s)`` and the result does not depend on ``threads``.
    """
    p = _check_probability(p)
    nblocks = -(-samples // MC_BLOCK)

    def block(b: int) -> np.ndarray:
        rows = min(MC_BLOCK, samples - b * MC_BLOCK)
        rng = np.random.Generator(np.random.Philox(key=seed).jumped(b))
        return v.values_from_bits(rng.random((rows, v.m)) < p)

    if threads > 1 and nblocks > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(block, range(nblocks)))
    else:
        parts = [block(b) for b in range(nblocks)]
    return np.concatenate(parts) if parts else np.zeros(0)


def _empirical_left_quantile(sorted_values: np.ndarray, level: float) -> float:
    k = max(1, math.ceil(level * len(sorted_values) - QUANTILE_TOL))
    return float(sorted_values[min(k, len(sorted_values)) - 1])


def mc_quantile_bracket(
    v: Valuation,
    n: int,
    c: float,
    q: float,
    epsilon: float,
    delta: float,
    seed: int,
    threads: int = 1,
) -> QuantileBracket:
    """Bracket the thinned quantile share from Monte Carlo samples.

    With ``N = ceil(ln(2/delta) / (2 eps^2))`` samples the DKW inequality
    keeps the empirical CDF within ``eps`` of the true one with probability
    at least ``1 - delta``; on that event the empirical quantiles at
    ``q - eps`` and ``q + eps`` enclose the true ``q``-quantile.
    """
    _check_agents(n)
    ShareSpec.thinned_quantile(c, q)
    if not 0 < epsilon < min(q, 1 - q):
        raise DomainError(f"epsilon must lie in (0, min(q, 1-q)), got {epsilon}")
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if not 0 <= seed < 2**64:
        raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed}")
    N = mc_sample_count(epsilon, delta)
    vals = np.sort(mc_values(v, c / n, N, seed, threads))
    return QuantileBracket(
        lo=_empirical_left_quantile(vals, q - epsilon),
        hi=_empirical_left_quantile(vals, q + epsilon),
        q=q,
        epsilon=epsilon,
        delta=delta,
        samples=N,
        seed=seed,
    )


@dataclass(frozen=True)
class ThinningBudget:
    n: int
    c_max: float
    c: float
    q_c: float
    fallback_c: float = UNIVERSAL_THINNING


def thinning_budget(n: int, c: float | None = None) -> ThinningBudget:
    """Thinning constants under which the thinned quantile share is known to be feasible.

    ``c_max`` is the supremum of admissible ``c`` for ``n`` agents:
    ``1/(12 ln(e^2 n))``, improved to ``1/(3e)`` once ``n >= 10^7 + 2``.
    ``q_c = (1 - c/n)^(n-1)`` is the matching quantile level for the chosen
    ``c`` (default: the universal ``1/250``).
    """
    _check_agents(n)
    c_max = 1.0 / (12.0 * (2.0 + math.log(n)))
    if n >= LARGE_N_MIN_AGENTS:
        c_max = max(c_max, 1.0 / (3.0 * math.e))
    if c is None:
        c = UNIVERSAL_THINNING
    if not 0 < c <= c_max:
        raise DomainError(f"c must lie in (0, {c_max:.6g}] for n={n}, got {c}")
    return ThinningBudget(n=n, c_max=c_max, c=c, q_c=(1.0 - c / n) ** (n - 1))
