"""Extremal set theory at desk scale.

Down-sets and their biased product measures, Kruskal-Katona shadows,
cross-dependent families (tuples with no rainbow matching), the rainbow
Erdos matching bound with its two extremal constructions, and an exact
search for the best cross-dependent tuple on tiny ground sets.

Sets are bitmasks over ``[m]`` (or ``[M]``), bit ``i - 1`` for element ``i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, NamedTuple, Sequence

from .errors import CapabilityError, DomainError, InstanceFormatError
from .model import MAX_SCAN_GOODS, full_mask, mask_of, members

DEFAULT_CROSS_BUDGET = 10**8
DEFAULT_MAXMIN_BUDGET = 5 * 10**6


def is_downset(members_: Iterable[int], m: int) -> bool:
    """Closed under deleting single elements (hence under all subsets)."""
    if m > MAX_SCAN_GOODS:
        raise CapabilityError(f"down-set checks are limited to m <= {MAX_SCAN_GOODS}")
    fam = set(members_)
    if any(s < 0 or s >> m for s in fam):
        return False
    for s in fam:
        rest = s
        while rest:
            low = rest & -rest
            if s ^ low not in fam:
                return False
            rest ^= low
    return True


@dataclass(frozen=True)
class DownSet:
    m: int
    members: frozenset[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", frozenset(self.members))
        if not is_downset(self.members, self.m):
            raise DomainError("family is not closed under taking subsets")

    @classmethod
    def generated_by(cls, m: int, generators: Iterable[int]) -> DownSet:
        """Smallest down-set containing every generator."""
        out: set[int] = set()
        for g in generators:
            if g in out:
                continue
            sub = g
            while True:
                out.add(sub)
                if sub == 0:
                    break
                sub = (sub - 1) & g
        return cls(m, frozenset(out))

    @classmethod
    def full(cls, m: int) -> DownSet:
        return cls(m, frozenset(range(1 << m)))

    def maximal_elements(self) -> frozenset[int]:
        return frozenset(
            s for s in self.members if not any(s & (1 << j) == 0 and s | (1 << j) in self.members for j in range(self.m))
        )

    def __len__(self) -> int:
        return len(self.members)


def all_downsets(m: int) -> list[DownSet]:
    """Every down-set of ``2^[m]`` (Dedekind number many; 168 for m = 4).

    Uses the split by the last element: a down-set on ``[m]`` is a pair
    ``D1 <= D0`` of down-sets on ``[m-1]``, glued as ``D0 + (D1 with m added)``.
    """
    if m > 5:
        raise CapabilityError("exhaustive down-set enumeration is limited to m <= 5")
    fams: list[frozenset[int]] = [frozenset(), frozenset({0})]
    for j in range(m):
        bit = 1 << j
        fams = [d0 | frozenset(s | bit for s in d1) for d0 in fams for d1 in fams if d1 <= d0]
    return [DownSet(m, f) for f in fams]


def random_downset(m: int, rng, generators: int | None = None) -> DownSet:
    """Down-closure of a few uniformly random subsets."""
    k = generators if generators is not None else int(rng.integers(0, 2 * m + 1))
    gens = [int(x) for x in rng.integers(0, 1 << m, size=k)]
    return DownSet.generated_by(m, gens)


def mu(D: DownSet, p: float) -> float:
    """Probability of ``D`` under the product measure with inclusion probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    if len(D.members) == 1 << D.m:
        return 1.0
    return math.fsum(p ** s.bit_count() * (1.0 - p) ** (D.m - s.bit_count()) for s in D.members)


def check_downset_inequality(D: DownSet, p: float, alpha: float) -> float:
    """Residual ``mu_{alpha p}(D) - mu_p(D)^alpha``; nonnegative for every down-set."""
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    return mu(D, alpha * p) - mu(D, p) ** alpha


def _xlog1x(x: float) -> float:
    return 0.0 if x <= 0.0 else x * math.log(1.0 / x)


def check_differential_inequality(D: DownSet, p: float, h: float = 1e-5) -> float:
    """Residual ``-p F'(p) - F(p) ln(1/F(p))`` with ``F = mu(D, .)``, ``F'`` by central difference."""
    if not 0 < p < 1:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    if not 0 < h <= 1e-4 or p - h < 0 or p + h > 1:
        raise DomainError(f"step h={h} must lie in (0, 1e-4] with [p-h, p+h] inside [0, 1]")
    slope = (mu(D, p + h) - mu(D, p - h)) / (2.0 * h)
    return -p * slope - _xlog1x(mu(D, p))


@dataclass(frozen=True)
class SetFamily:
    """A family of ``k``-subsets of ``[M]``."""

    M: int
    k: int
    members: frozenset[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", frozenset(self.members))
        if not 0 <= self.k <= self.M or self.M > 63:
            raise DomainError(f"need 0 <= k <= M <= 63, got k={self.k}, M={self.M}")
        for s in self.members:
            if s < 0 or s >> self.M or s.bit_count() != self.k:
                raise DomainError(f"{members(s)} is not a {self.k}-subset of [{self.M}]")

    @classmethod
    def of(cls, M: int, k: int, sets: Iterable[Iterable[int]]) -> SetFamily:
        return cls(M, k, frozenset(mask_of(s) for s in sets))

    @classmethod
    def complete(cls, M: int, k: int, ground: int | None = None) -> SetFamily:
        """All ``k``-subsets of ``ground`` (default ``[M]``)."""
        elems = members(full_mask(M) if ground is None else ground)
        return cls(M, k, frozenset(mask_of(c) for c in combinations(elems, k)))

    def __len__(self) -> int:
        return len(self.members)

    def sorted_members(self) -> list[int]:
        return sorted(self.members, key=lambda s: members(s))


def shadow(F: SetFamily, t: int) -> SetFamily:
    """All ``t``-subsets contained in some member of ``F``."""
    if not 0 <= t <= F.k:
        raise DomainError(f"shadow level must lie in [0, {F.k}], got {t}")
    out = set()
    for s in F.members:
        for c in combinations(members(s), t):
            out.add(mask_of(c))
    return SetFamily(F.M, t, frozenset(out))


def binom_real(x: float, k: int) -> float:
    """Generalised binomial ``x (x-1) ... (x-k+1) / k!``."""
    if k < 0:
        raise DomainError(f"k must be nonnegative, got {k}")
    out = 1.0
    for i in range(k):
        out *= (x - i) / (i + 1)
    return out


def kk_lower_bound(size: int, k: int, t: int) -> float:
    """Lovasz form of Kruskal-Katona: with ``size = binom(x, k)``, ``x >= k``,
    every ``t``-shadow has at least ``binom(x, t)`` members."""
    if size < 1:
        raise DomainError(f"family size must be at least 1, got {size}")
    if not 0 <= t <= k:
        raise DomainError(f"need 0 <= t <= k, got t={t}, k={k}")
    if k == 0:
        return 1.0
    # exact integer root when size is a binomial coefficient
    j = k
    while math.comb(j, k) < size:
        j += 1
        if j > k + size:
            break
    if math.comb(j, k) == size:
        return float(math.comb(j, t))
    lo, hi = float(k), float(k + size)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if binom_real(mid, k) < size:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi:
            break
    # lo undershoots the root, so the bound stays valid
    return binom_real(lo, t)


class CrossCheck(NamedTuple):
    dependent: bool
    witness: tuple[int, ...] | None


def _check_uniform(families: Sequence[SetFamily]) -> tuple[int, int]:
    if len(families) < 1:
        raise DomainError("need at least one family")
    M, k = families[0].M, families[0].k
    if any(f.M != M or f.k != k for f in families):
        raise DomainError("all families must share the ground set size M and uniformity k")
    return M, k


def is_cross_dependent(families: Sequence[SetFamily], budget: int = DEFAULT_CROSS_BUDGET) -> CrossCheck:
    """No choice of one member per family is pairwise disjoint.

    Returns ``CrossCheck(False, witness)`` with a disjoint transversal in the
    original family order when one exists.
    """
    _check_uniform(families)
    order = sorted(range(len(families)), key=lambda i: len(families[i]))
    lists = [families[i].sorted_members() for i in order]
    chosen = [0] * len(lists)
    nodes = 0

    def rec(depth: int, used: int) -> bool:
        nonlocal nodes
        if depth == len(lists):
            return True
        for s in lists[depth]:
            nodes += 1
            if nodes > budget:
                raise CapabilityError(f"cross-dependence search exceeded {budget} nodes")
            if s & used == 0:
                chosen[depth] = s
                if rec(depth + 1, used | s):
                    return True
        return False

    if not rec(0, 0):
        return CrossCheck(True, None)
    witness = [0] * len(lists)
    for pos, i in enumerate(order):
        witness[i] = chosen[pos]
    return CrossCheck(False, tuple(witness))


def _check_emc_params(n: int, k: int, M: int) -> None:
    for name, x in (("n", n), ("k", k), ("M", M)):
        if isinstance(x, bool) or not isinstance(x, int):
            raise DomainError(f"{name} must be an integer, got {x!r}")
    if n < 2:
        raise DomainError(f"need n >= 2 families, got {n}")
    if k < 1:
        raise DomainError(f"need k >= 1, got {k}")
    if M < n * k:
        raise DomainError(f"need M >= n k = {n * k}, got M = {M}")
    if M > 63:
        raise DomainError(f"M is limited to 63, got {M}")


def emc_bound(n: int, k: int, M: int) -> int:
    """``max(C(M,k) - C(M-n+1,k), C(kn-1,k))``, exact integers."""
    _check_emc_params(n, k, M)
    return max(math.comb(M, k) - math.comb(M - n + 1, k), math.comb(k * n - 1, k))


def construction_clique(n: int, k: int, M: int) -> list[SetFamily]:
    """``n`` copies of all ``k``-subsets of ``[kn - 1]``."""
    _check_emc_params(n, k, M)
    fam = SetFamily.complete(M, k, full_mask(k * n - 1))
    return [fam] * n


def construction_star(n: int, k: int, M: int) -> list[SetFamily]:
    """``n`` copies of the ``k``-subsets of ``[M]`` meeting ``[n - 1]``."""
    _check_emc_params(n, k, M)
    hub = full_mask(n - 1)
    fam = SetFamily(M, k, frozenset(s for s in SetFamily.complete(M, k).members if s & hub))
    return [fam] * n


def _rainbow_unions(fams: Sequence[Sequence[int]]) -> set[int]:
    """Unions of all pairwise-disjoint transversals of ``fams``."""
    unions = {0}
    for fam in fams:
        unions = {u | s for u in unions for s in fam if u & s == 0}
        if not unions:
            break
    return unions


def _completion(universe: Sequence[int], partial: Sequence[Sequence[int]]) -> list[int]:
    """Largest last family keeping the tuple cross-dependent."""
    unions = _rainbow_unions(partial)
    return [s for s in universe if all(s & u for u in unions)]


def greedy_closure(families: Sequence[SetFamily]) -> list[SetFamily]:
    """Grow each family by every set that keeps the tuple cross-dependent, until stable."""
    M, k = _check_uniform(families)
    universe = SetFamily.complete(M, k).sorted_members()
    fams = [list(f.sorted_members()) for f in families]
    changed = True
    while changed:
        changed = False
        for i in range(len(fams)):
            others = fams[:i] + fams[i + 1 :]
            grown = _completion(universe, others)
            if len(grown) > len(fams[i]):
                fams[i] = grown
                changed = True
    return [SetFamily(M, k, frozenset(f)) for f in fams]


def best_cross_dependent(n: int, k: int, M: int, budget: int = DEFAULT_MAXMIN_BUDGET) -> tuple[int, list[SetFamily]]:
    """Exact ``max min_j |F_j|`` over cross-dependent ``n``-tuples of ``k``-uniform families, with an optimiser.

    Branch and bound over the first ``n - 1`` families, taken in nondecreasing
    bitmask order over the ``C(M, k)`` universe (families are interchangeable).
    The last family is always the largest one compatible with the others, and
    every candidate family must beat the incumbent in size.
    """
    _check_emc_params(n, k, M)
    universe = SetFamily.complete(M, k).sorted_members()
    N = len(universe)
    if N > 16:
        raise CapabilityError(f"C(M, k) = {N} sets is too many for exhaustive search")
    # candidate families as index-bitmasks over the universe, largest first
    candidates = sorted(range(1, 1 << N), key=lambda f: (-f.bit_count(), f))
    sets_of = {}

    def as_sets(f: int) -> list[int]:
        if f not in sets_of:
            sets_of[f] = [universe[i] for i in range(N) if f >> i & 1]
        return sets_of[f]

    best = 0
    best_tuple: list[list[int]] = [[] for _ in range(n)]
    nodes = 0
    chosen: list[int] = []

    def rec(start: int) -> None:
        nonlocal best, best_tuple, nodes
        if len(chosen) == n - 1:
            partial = [as_sets(f) for f in chosen]
            last = _completion(universe, partial)
            score = min([len(last)] + [f.bit_count() for f in chosen])
            if score > best:
                best, best_tuple = score, partial + [last]
            return
        for idx in range(start, len(candidates)):
            f = candidates[idx]
            if f.bit_count() <= best:
                break
            nodes += 1
            if nodes > budget:
                raise CapabilityError(f"max-min search exceeded {budget} nodes")
            chosen.append(f)
            rec(idx)
            chosen.pop()

    rec(0)
    return best, [SetFamily(M, k, frozenset(f)) for f in best_tuple]


def max_min_cross_dependent(n: int, k: int, M: int, budget: int = DEFAULT_MAXMIN_BUDGET) -> int:
    return best_cross_dependent(n, k, M, budget)[0]


def format_set(mask: int) -> str:
    elems = members(mask)
    if any(e >= 10 for e in elems):
        return ".".join(str(e) for e in elems)
    return "".join(str(e) for e in elems)


def parse_set(token: str) -> int:
    token = token.strip()
    try:
        elems = [int(x) for x in token.split(".")] if "." in token else [int(ch) for ch in token]
    except ValueError:
        raise InstanceFormatError(f"bad set literal {token!r}") from None
    if any(e < 1 for e in elems) or len(set(elems)) != len(elems):
        raise InstanceFormatError(f"bad set literal {token!r}")
    return mask_of(elems)


def parse_families(literal: str) -> list[SetFamily]:
    """Parse ``"M=5;k=2;F1=12,13,23;F2=12,13,23"`` into families."""
    fields: dict[str, str] = {}
    for part in literal.split(";"):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise InstanceFormatError(f"expected key=value, got {part!r}")
        key, val = part.split("=", 1)
        fields[key.strip()] = val.strip()
    try:
        M, k = int(fields.pop("M")), int(fields.pop("k"))
    except (KeyError, ValueError):
        raise InstanceFormatError("family literal needs integer M and k") from None
    keys = sorted(fields, key=lambda s: int(s[1:]) if s[1:].isdigit() else -1)
    if any(not (key.startswith("F") and key[1:].isdigit()) for key in keys):
        raise InstanceFormatError(f"unexpected keys in family literal: {keys}")
    if [int(key[1:]) for key in keys] != list(range(1, len(keys) + 1)):
        raise InstanceFormatError("families must be named F1, F2, ... consecutively")
    fams = []
    for key in keys:
        sets = [parse_set(tok) for tok in fields[key].split(",") if tok.strip()]
        try:
            fams.append(SetFamily(M, k, frozenset(sets)))
        except DomainError as exc:
            raise InstanceFormatError(f"{key}: {exc}") from None
    return fams


def format_family(F: SetFamily) -> str:
    return ",".join(format_set(s) for s in F.sorted_members())
