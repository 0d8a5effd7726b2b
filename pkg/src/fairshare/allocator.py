"""Exact search for allocations meeting per-agent thresholds."""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Sequence

from .errors import CapabilityError, DomainError
from .instance import Instance
from .model import Bundle, Valuation, full_mask, minimal_accepted, reduce_01
from .shares import ShareValue, compute_share

MAX_SEARCH_GOODS = 16
DEFAULT_NODE_BUDGET = 10**7


@dataclass(frozen=True)
class Allocation:
    """One bundle per agent, as bitmasks; agent ``i`` (1-indexed) gets ``bundles[i - 1]``."""

    bundles: tuple[Bundle, ...]

    def is_partition(self, m: int) -> bool:
        union = 0
        for b in self.bundles:
            if b & union:
                return False
            union |= b
        return union == full_mask(m)


@dataclass(frozen=True)
class FeasibilityReport:
    shares: tuple[ShareValue, ...]
    allocation: Allocation | None
    nodes_explored: int
    elapsed: float

    @property
    def feasible(self) -> bool:
        return self.allocation is not None


def verify_allocation(profile: Sequence[Valuation], thresholds: Sequence[float], alloc: Allocation) -> bool:
    """Bundles are disjoint, cover every good, and each agent reaches her threshold."""
    if not (len(profile) == len(thresholds) == len(alloc.bundles)):
        raise DomainError("profile, thresholds and allocation must have the same length")
    if not profile:
        return True
    m = profile[0].m
    if any(b < 0 or b >> m for b in alloc.bundles) or not alloc.is_partition(m):
        return False
    return all(v.value(b) >= t for v, t, b in zip(profile, thresholds, alloc.bundles))


def search_allocation(
    profile: Sequence[Valuation],
    thresholds: Sequence[float],
    budget: int | None = None,
) -> tuple[Allocation | None, int]:
    """Backtracking search; returns ``(allocation or None, nodes explored)``.

    ``None`` means the whole search space was exhausted.  Running out of
    ``budget`` nodes raises :class:`CapabilityError` instead, so that
    infeasibility is never reported without proof.
    """
    if len(profile) != len(thresholds):
        raise DomainError("profile and thresholds must have the same length")
    if not profile:
        raise DomainError("need at least one agent")
    m = profile[0].m
    if any(v.m != m for v in profile):
        raise DomainError("all valuations must share the same ground set")
    budget = DEFAULT_NODE_BUDGET if budget is None else budget

    active = [i for i, t in enumerate(thresholds) if t > 0]
    bundles = [0] * len(profile)
    if active and m > MAX_SEARCH_GOODS:
        raise CapabilityError(f"exact allocation search is limited to m <= {MAX_SEARCH_GOODS}, got {m}")

    options = {i: minimal_accepted(reduce_01(profile[i], thresholds[i])) for i in active}
    # fewest options first: fail fast
    order = sorted(active, key=lambda i: (len(options[i]), i))
    nodes = 0

    def rec(depth: int, used: int) -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise CapabilityError(f"allocation search exceeded its budget of {budget} nodes")
        if depth == len(order):
            return True
        # forward check: every remaining agent still has a disjoint option
        for j in order[depth + 1 :]:
            if not any(s & used == 0 for s in options[j]):
                return False
        i = order[depth]
        for s in options[i]:
            if s & used == 0:
                bundles[i] = s
                if rec(depth + 1, used | s):
                    return True
        bundles[i] = 0
        return False

    if not rec(0, 0):
        return None, nodes
    assigned = 0
    for b in bundles:
        assigned |= b
    bundles[0] |= full_mask(m) & ~assigned
    return Allocation(tuple(bundles)), nodes


def find_fair_allocation(
    profile: Sequence[Valuation],
    thresholds: Sequence[float],
    budget: int | None = None,
) -> Allocation | None:
    """An allocation with ``v_i(S_i) >= thresholds[i]`` for all agents, or ``None`` if none exists.

    Leftover goods go to agent 1, so the result always partitions ``[m]``.
    """
    return search_allocation(profile, thresholds, budget)[0]


def brute_force_allocation(profile: Sequence[Valuation], thresholds: Sequence[float]) -> Allocation | None:
    """Reference oracle: try all ``n^m`` assignments of goods to agents."""
    n, m = len(profile), profile[0].m
    tables = [v.table().tolist() for v in profile]
    for assignment in itertools.product(range(n), repeat=m):
        bundles = [0] * n
        for g, owner in enumerate(assignment):
            bundles[owner] |= 1 << g
        if all(tables[i][bundles[i]] >= thresholds[i] for i in range(n)):
            return Allocation(tuple(bundles))
    return None


def feasibility_report(inst: Instance, budget: int | None = None) -> FeasibilityReport:
    """Compute each agent's share under ``inst.share`` and search for a fair allocation."""
    start = time.perf_counter()
    shares = tuple(compute_share(v, inst.n, inst.share) for v in inst.valuations)
    alloc, nodes = search_allocation(inst.valuations, [s.value for s in shares], budget)
    return FeasibilityReport(shares, alloc, nodes, time.perf_counter() - start)
