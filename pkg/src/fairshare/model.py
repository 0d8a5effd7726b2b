"""Valuations over a ground set of indivisible goods.

Goods are numbered ``1..m``.  A bundle is an ``int`` bitmask in which bit
``i - 1`` stands for good ``i``; ``mask_of`` and ``members`` convert between
the two views.  Every valuation is monotone with ``v(empty) == 0``; the
structural kinds are monotone by construction, tables and oracles are
checked with :func:`is_monotone`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Callable, ClassVar, Iterable, Mapping

import numpy as np

from .errors import CapabilityError, DomainError, MalformedValuationError

Bundle = int

MAX_SCAN_GOODS = 20


def mask_of(goods: Iterable[int]) -> Bundle:
    """Bitmask of a collection of 1-indexed goods."""
    mask = 0
    for g in goods:
        if g < 1:
            raise DomainError(f"goods are 1-indexed, got {g}")
        mask |= 1 << (g - 1)
    return mask


def members(mask: Bundle) -> tuple[int, ...]:
    """Sorted 1-indexed goods of a bitmask."""
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def full_mask(m: int) -> Bundle:
    return (1 << m) - 1


def popcounts(m: int) -> np.ndarray:
    """Array ``c`` with ``c[S] = |S|`` for every ``S`` in ``2^[m]``."""
    c = np.zeros(1, dtype=np.int64)
    for _ in range(m):
        c = np.concatenate([c, c + 1])
    return c


def _check_scan(m: int, what: str) -> None:
    if m > MAX_SCAN_GOODS:
        raise CapabilityError(f"{what} enumerates 2^m subsets; m={m} exceeds {MAX_SCAN_GOODS}")


def _check_weights(weights: Iterable[float], m: int) -> tuple[float, ...]:
    w = tuple(float(x) for x in weights)
    if len(w) != m:
        raise MalformedValuationError(f"expected {m} weights, got {len(w)}")
    for x in w:
        if not math.isfinite(x) or x < 0:
            raise MalformedValuationError(f"weights must be finite and nonnegative, got {x}")
    return w


@dataclass(frozen=True)
class Valuation:
    """Base class; subclasses define ``value`` and usually a vectorised ``table``."""

    m: int
    kind: ClassVar[str] = "abstract"
    structural: ClassVar[bool] = True

    def __post_init__(self) -> None:
        if not isinstance(self.m, (int, np.integer)) or isinstance(self.m, bool):
            raise MalformedValuationError(f"good count must be an integer, got {self.m!r}")
        if self.m < 1:
            raise MalformedValuationError(f"good count must be positive, got {self.m}")

    def __call__(self, mask: Bundle) -> float:
        return self.value(mask)

    def value(self, mask: Bundle) -> float:
        raise NotImplementedError

    def _table(self) -> np.ndarray:
        return np.fromiter((self.value(s) for s in range(1 << self.m)), dtype=np.float64, count=1 << self.m)

    @cached_property
    def _cached_table(self) -> np.ndarray:
        t = self._table()
        t.setflags(write=False)
        return t

    def table(self) -> np.ndarray:
        """Values of every subset, indexed by bitmask (read-only array)."""
        _check_scan(self.m, "value table")
        return self._cached_table

    def values_from_bits(self, bits: np.ndarray) -> np.ndarray:
        """Evaluate on many bundles given as a boolean ``(N, m)`` membership matrix."""
        if self.m <= MAX_SCAN_GOODS:
            return self.table()[bits_to_masks(bits)]
        return np.array([self.value(s) for s in bits_to_int_masks(bits)], dtype=np.float64)

    def _check_mask(self, mask: Bundle) -> None:
        if mask < 0 or mask >> self.m:
            raise DomainError(f"bundle {members(mask) if mask >= 0 else mask} is not a subset of [{self.m}]")


def bits_to_masks(bits: np.ndarray) -> np.ndarray:
    """Row-wise bitmasks as int64 (at most 62 columns)."""
    bits = np.asarray(bits, dtype=bool)
    weights = np.left_shift(np.int64(1), np.arange(bits.shape[1], dtype=np.int64))
    return bits.astype(np.int64) @ weights


def bits_to_int_masks(bits: np.ndarray) -> list[int]:
    """Row-wise bitmasks as Python ints, for any column count."""
    return [int.from_bytes(np.packbits(row, bitorder="little").tobytes(), "little") for row in np.asarray(bits, dtype=bool)]


@dataclass(frozen=True)
class Additive(Valuation):
    weights: tuple[float, ...] = ()
    kind: ClassVar[str] = "additive"

    def __post_init__(self) -> None:
        super().__post_init__()
        object.__setattr__(self, "weights", _check_weights(self.weights, self.m))

    def value(self, mask: Bundle) -> float:
        self._check_mask(mask)
        return sum((self.weights[g - 1] for g in members(mask)), 0.0)

    def _table(self) -> np.ndarray:
        t = np.zeros(1)
        for w in self.weights:
            t = np.concatenate([t, t + w])
        return t

    def values_from_bits(self, bits: np.ndarray) -> np.ndarray:
        if self.m <= MAX_SCAN_GOODS:
            return super().values_from_bits(bits)
        return np.asarray(bits, dtype=np.float64) @ np.array(self.weights)


@dataclass(frozen=True)
class UnitDemand(Valuation):
    weights: tuple[float, ...] = ()
    kind: ClassVar[str] = "unit_demand"

    def __post_init__(self) -> None:
        super().__post_init__()
        object.__setattr__(self, "weights", _check_weights(self.weights, self.m))

    def value(self, mask: Bundle) -> float:
        self._check_mask(mask)
        return max((self.weights[g - 1] for g in members(mask)), default=0.0)

    def _table(self) -> np.ndarray:
        t = np.zeros(1)
        for w in self.weights:
            t = np.concatenate([t, np.maximum(t, w)])
        return t

    def values_from_bits(self, bits: np.ndarray) -> np.ndarray:
        if self.m <= MAX_SCAN_GOODS:
            return super().values_from_bits(bits)
        return (np.asarray(bits, dtype=np.float64) * np.array(self.weights)).max(axis=1, initial=0.0)


@dataclass(frozen=True)
class Threshold(Valuation):
    """``v(S) = 1{|S| >= T}``; ``T = 0`` is rejected because it would make ``v(empty) = 1``."""

    T: int = 1
    kind: ClassVar[str] = "threshold"

    def __post_init__(self) -> None:
        super().__post_init__()
        if isinstance(self.T, bool) or not isinstance(self.T, (int, np.integer)):
            raise MalformedValuationError(f"threshold T must be an integer, got {self.T!r}")
        if self.T < 1:
            raise MalformedValuationError(f"threshold T must be >= 1 so that v(empty) = 0, got {self.T}")

    def value(self, mask: Bundle) -> float:
        self._check_mask(mask)
        return 1.0 if mask.bit_count() >= self.T else 0.0

    def _table(self) -> np.ndarray:
        return (popcounts(self.m) >= self.T).astype(np.float64)

    def values_from_bits(self, bits: np.ndarray) -> np.ndarray:
        return (np.asarray(bits).sum(axis=1) >= self.T).astype(np.float64)


@dataclass(frozen=True)
class Nonempty(Valuation):
    kind: ClassVar[str] = "nonempty"

    def value(self, mask: Bundle) -> float:
        self._check_mask(mask)
        return 1.0 if mask else 0.0

    def _table(self) -> np.ndarray:
        t = np.ones(1 << self.m)
        t[0] = 0.0
        return t

    def values_from_bits(self, bits: np.ndarray) -> np.ndarray:
        return np.asarray(bits).any(axis=1).astype(np.float64)


@dataclass(frozen=True)
class TwoBlock(Valuation):
    """``v(S) = 1`` iff ``S`` meets both the red and the blue block (complementary goods).

    Blocks are bitmasks; goods in neither block are worthless dummies.
    """

    red: Bundle = 0
    blue: Bundle = 0
    kind: ClassVar[str] = "two_block"

    def __post_init__(self) -> None:
        super().__post_init__()
        if not self.red or not self.blue:
            raise MalformedValuationError("two_block needs nonempty red and blue blocks")
        if self.red & self.blue:
            raise MalformedValuationError("two_block blocks must be disjoint")
        if (self.red | self.blue) >> self.m:
            raise MalformedValuationError(f"two_block blocks must lie inside [{self.m}]")

    @classmethod
    def from_goods(cls, m: int, red: Iterable[int], blue: Iterable[int]) -> TwoBlock:
        return cls(m=m, red=mask_of(red), blue=mask_of(blue))

    def value(self, mask: Bundle) -> float:
        self._check_mask(mask)
        return 1.0 if (mask & self.red and mask & self.blue) else 0.0

    def _table(self) -> np.ndarray:
        idx = np.arange(1 << self.m, dtype=np.int64)
        return (((idx & self.red) != 0) & ((idx & self.blue) != 0)).astype(np.float64)

    def values_from_bits(self, bits: np.ndarray) -> np.ndarray:
        bits = np.asarray(bits, dtype=bool)
        r = np.array([bool(self.red >> j & 1) for j in range(self.m)])
        b = np.array([bool(self.blue >> j & 1) for j in range(self.m)])
        return ((bits & r).any(axis=1) & (bits & b).any(axis=1)).astype(np.float64)


@dataclass(frozen=True)
class Table(Valuation):
    """Explicit value per subset.  Missing subsets raise on lookup."""

    values: Mapping[int, float] = field(default_factory=dict)
    kind: ClassVar[str] = "table"
    structural: ClassVar[bool] = False

    def __post_init__(self) -> None:
        super().__post_init__()
        clean = {}
        for s, x in self.values.items():
            s = int(s)
            if s < 0 or s >> self.m:
                raise MalformedValuationError(f"table key {s} is not a subset of [{self.m}]")
            x = float(x)
            if not math.isfinite(x) or x < 0:
                raise MalformedValuationError(f"table values must be finite and nonnegative, got {x}")
            clean[s] = x
        object.__setattr__(self, "values", clean)

    @classmethod
    def from_array(cls, values: Iterable[float]) -> Table:
        arr = [float(x) for x in values]
        m = len(arr).bit_length() - 1
        if len(arr) != 1 << m:
            raise MalformedValuationError(f"table length {len(arr)} is not a power of two")
        return cls(m=m, values=dict(enumerate(arr)))

    def value(self, mask: Bundle) -> float:
        self._check_mask(mask)
        try:
            return self.values[mask]
        except KeyError:
            raise MalformedValuationError(f"table has no entry for subset {set(members(mask)) or '{}'}") from None

    def _table(self) -> np.ndarray:
        if len(self.values) != 1 << self.m:
            missing = next(s for s in range(1 << self.m) if s not in self.values)
            raise MalformedValuationError(f"table has no entry for subset {set(members(missing)) or '{}'}")
        return np.array([self.values[s] for s in range(1 << self.m)], dtype=np.float64)

    def scaled(self, alpha: float) -> Table:
        if not alpha > 0:
            raise DomainError(f"scale factor must be positive, got {alpha}")
        return Table(m=self.m, values={s: alpha * x for s, x in self.values.items()})


@dataclass(frozen=True)
class Oracle(Valuation):
    """Wraps an arbitrary callable on bitmasks; monotonicity is the caller's claim, checked on demand."""

    fn: Callable[[Bundle], float] = field(default=lambda s: 0.0, compare=False)
    kind: ClassVar[str] = "oracle"
    structural: ClassVar[bool] = False

    def value(self, mask: Bundle) -> float:
        self._check_mask(mask)
        return float(self.fn(mask))


@dataclass(frozen=True)
class Padded(Valuation):
    """``v~(T) = base(T & [base.m])`` on a larger ground set ``[m]``."""

    base: Valuation = None  # type: ignore[assignment]
    kind: ClassVar[str] = "padded"

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.base is None or self.m < self.base.m:
            raise DomainError("padded ground set must contain the base ground set")

    @property
    def structural(self) -> bool:  # type: ignore[override]
        return self.base.structural

    def value(self, mask: Bundle) -> float:
        self._check_mask(mask)
        return self.base.value(mask & full_mask(self.base.m))

    def _table(self) -> np.ndarray:
        idx = np.arange(1 << self.m, dtype=np.int64)
        return self.base.table()[idx & full_mask(self.base.m)]

    def values_from_bits(self, bits: np.ndarray) -> np.ndarray:
        return self.base.values_from_bits(np.asarray(bits)[:, : self.base.m])


@dataclass(frozen=True)
class ZeroOneValuation(Valuation):
    """Monotone 0/1 valuation stored as the antichain of its minimal accepted sets."""

    minimal: frozenset[int] = frozenset()
    kind: ClassVar[str] = "zero_one"

    def __post_init__(self) -> None:
        super().__post_init__()
        mins = frozenset(int(s) for s in self.minimal)
        object.__setattr__(self, "minimal", mins)
        for s in mins:
            if s >> self.m:
                raise MalformedValuationError(f"accepted set {members(s)} is not a subset of [{self.m}]")
        if 0 in mins:
            raise MalformedValuationError("the empty bundle cannot be accepted: v(empty) must be 0")
        if self.m <= MAX_SCAN_GOODS:
            if _minimal_elements(_up_closure(mins, self.m), self.m) != mins:
                raise MalformedValuationError("minimal accepted sets must form an antichain")
        else:
            for a, b in combinations(mins, 2):
                if a & b == a or a & b == b:
                    raise MalformedValuationError("minimal accepted sets must form an antichain")

    def value(self, mask: Bundle) -> float:
        self._check_mask(mask)
        return 1.0 if any(mask & s == s for s in self.minimal) else 0.0

    def _table(self) -> np.ndarray:
        return _up_closure(self.minimal, self.m).astype(np.float64)


def _up_closure(generators: Iterable[int], m: int) -> np.ndarray:
    acc = np.zeros(1 << m, dtype=bool)
    acc[list(generators)] = True
    idx = np.arange(1 << m, dtype=np.int64)
    for j in range(m):
        with_j = (idx >> j) & 1 == 1
        acc[with_j] |= acc[idx[with_j] ^ (1 << j)]
    return acc


def _minimal_elements(accepted: np.ndarray, m: int) -> frozenset[int]:
    idx = np.arange(1 << m, dtype=np.int64)
    has_smaller = np.zeros(1 << m, dtype=bool)
    for j in range(m):
        with_j = (idx >> j) & 1 == 1
        has_smaller[with_j] |= accepted[idx[with_j] ^ (1 << j)]
    return frozenset(int(s) for s in np.flatnonzero(accepted & ~has_smaller))


def evaluate(v: Valuation, bundle: Bundle | Iterable[int]) -> float:
    """``v(S)`` for a bitmask or an iterable of 1-indexed goods."""
    mask = bundle if isinstance(bundle, (int, np.integer)) else mask_of(bundle)
    return v.value(int(mask))


def is_monotone(v: Valuation) -> bool:
    """True iff ``v(empty) = 0`` and ``v`` is nondecreasing under inclusion.

    Structural kinds are monotone by construction; tables and oracles are
    scanned exhaustively, which needs ``m <= 20``.
    """
    if v.structural:
        return True
    t = v.table()
    if t[0] != 0.0:
        return False
    idx = np.arange(1 << v.m, dtype=np.int64)
    for j in range(v.m):
        without_j = (idx >> j) & 1 == 0
        if np.any(t[idx[without_j] | (1 << j)] < t[without_j]):
            return False
    return True


def reduce_01(v: Valuation, tau: float) -> ZeroOneValuation:
    """The 0/1 valuation ``u(T) = 1{v(T) >= tau}``, stored by its minimal accepted sets."""
    if not tau > 0:
        raise DomainError(f"reduction threshold must be positive, got {tau}")
    _check_scan(v.m, "0/1 reduction")
    accepted = v.table() >= tau
    return ZeroOneValuation(m=v.m, minimal=_minimal_elements(accepted, v.m))


def minimal_accepted(u: ZeroOneValuation) -> list[Bundle]:
    """Inclusion-minimal accepted bundles, ordered by size then bitmask."""
    return sorted(u.minimal, key=lambda s: (s.bit_count(), s))


def pad(v: Valuation, M: int) -> Valuation:
    """Extend ``v`` to ``[M]`` with worthless dummy goods ``m+1..M``."""
    if M < v.m:
        raise DomainError(f"cannot pad m={v.m} goods down to M={M}")
    if M == v.m:
        return v
    extra = M - v.m
    if isinstance(v, Additive):
        return Additive(m=M, weights=v.weights + (0.0,) * extra)
    if isinstance(v, UnitDemand):
        return UnitDemand(m=M, weights=v.weights + (0.0,) * extra)
    if isinstance(v, TwoBlock):
        return TwoBlock(m=M, red=v.red, blue=v.blue)
    if isinstance(v, ZeroOneValuation):
        return ZeroOneValuation(m=M, minimal=v.minimal)
    if isinstance(v, Padded):
        return Padded(m=M, base=v.base)
    return Padded(m=M, base=v)
