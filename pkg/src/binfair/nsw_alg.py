"""Constant-factor Nash welfare approximation for binary XOS valuations.

Start from a perfect agent/good matching, then repeatedly let an agent whose
bundle is worth at most half of what it could form from the unassigned goods
and the bundles of much larger agents grab a non-wasteful set of twice its
current value.  Every step is recorded in a :class:`SolveTrace`.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Literal

from .core import (
    Allocation,
    Instance,
    from_mask,
    full_mask,
    nash_product,
    nsw_of_profile,
)
from .valuations import (
    CountingOracle,
    UnsupportedValuation,
    XOSFamily,
    Spectrum,
    extract_nonwasteful_mask,
    shrink_mask,
)

Status = Literal["solved", "zero_nsw"]


class InvariantViolation(RuntimeError):
    """A valuation broke its declared class mid-run (e.g. marginals not binary)."""


@dataclass(frozen=True)
class IterationRecord:
    agent: int
    old_size: int
    new_size: int
    nsw_before: float
    nsw_after: float
    values_before: tuple[int, ...]
    values_after: tuple[int, ...]

    @property
    def sizes_after(self) -> tuple[int, ...]:
        # bundles stay non-wasteful, so sizes equal values
        return self.values_after


@dataclass(frozen=True)
class SolveTrace:
    num_agents: int
    num_goods: int
    initial_matching: tuple[int | None, ...]
    iterations: tuple[IterationRecord, ...]
    total_value_queries: int

    def growth_ok(self) -> bool:
        return all(
            growth_holds(r.values_before, r.values_after, self.num_goods)
            for r in self.iterations
        )

    def within_iteration_bound(self) -> bool:
        return len(self.iterations) <= iteration_bound(self.num_agents, self.num_goods)

    def to_json(self) -> dict:
        return {
            "num_agents": self.num_agents,
            "num_goods": self.num_goods,
            "initial_matching": list(self.initial_matching),
            "iterations": [
                {
                    "agent": r.agent,
                    "old_size": r.old_size,
                    "new_size": r.new_size,
                    "nsw_before": r.nsw_before,
                    "nsw_after": r.nsw_after,
                    "values_before": list(r.values_before),
                    "values_after": list(r.values_after),
                }
                for r in self.iterations
            ],
            "total_value_queries": self.total_value_queries,
        }

    @classmethod
    def from_json(cls, obj: dict) -> SolveTrace:
        return cls(
            num_agents=int(obj["num_agents"]),
            num_goods=int(obj["num_goods"]),
            initial_matching=tuple(obj["initial_matching"]),
            iterations=tuple(
                IterationRecord(
                    agent=r["agent"],
                    old_size=r["old_size"],
                    new_size=r["new_size"],
                    nsw_before=r["nsw_before"],
                    nsw_after=r["nsw_after"],
                    values_before=tuple(r["values_before"]),
                    values_after=tuple(r["values_after"]),
                )
                for r in obj["iterations"]
            ),
            total_value_queries=int(obj["total_value_queries"]),
        )


@dataclass(frozen=True)
class SolveResult:
    allocation: Allocation
    completed_allocation: Allocation
    trace: SolveTrace
    status: Status


def growth_holds(before: tuple[int, ...], after: tuple[int, ...], m: int) -> bool:
    """Exact check of ``NSW_after^n >= NSW_before^n * (1 + 1/(4m+1))``."""
    return nash_product(after) * (4 * m + 1) >= nash_product(before) * (4 * m + 2)


def iteration_bound(n: int, m: int) -> float:
    """Loop-iteration ceiling ``(4m+1) n (log2(m/n) + 1) + 1``, clamped to at least 1."""
    return max(1.0, (4 * m + 1) * n * (math.log2(m / n) + 1) + 1)


def _require_xos(inst: Instance) -> None:
    for i, spec in enumerate(inst.valuations):
        if not spec.is_binary_xos:
            raise UnsupportedValuation(f"agent {i} has a {spec.kind} valuation; ALG needs binary XOS")


def maximum_matching(inst: Instance, oracles: list[CountingOracle] | None = None) -> list[int | None]:
    """Maximum matching of agents to goods they value at 1; entry i is agent i's good or None.

    Augmenting paths are searched breadth-first from each agent in index order,
    scanning goods in ascending order.
    """
    n, m = inst.n, inst.m
    if oracles is None:
        oracles = [CountingOracle(spec, m) for spec in inst.valuations]
    adj = [[g for g in range(m) if oracles[i](1 << g) == 1] for i in range(n)]
    owner: list[int | None] = [None] * m
    match: list[int | None] = [None] * n
    for root in range(n):
        parent: dict[int, int] = {}
        queue = deque([root])
        seen_agents = {root}
        end = None
        while queue and end is None:
            i = queue.popleft()
            for g in adj[i]:
                if g in parent:
                    continue
                parent[g] = i
                j = owner[g]
                if j is None:
                    end = g
                    break
                if j not in seen_agents:
                    seen_agents.add(j)
                    queue.append(j)
        if end is None:
            continue
        g = end
        while True:
            i = parent[g]
            prev = match[i]
            match[i] = g
            owner[g] = i
            if i == root:
                break
            g = prev
    return match


def initial_matching(inst: Instance) -> Allocation | None:
    """One unit-valued good per agent, or ``None`` when no such matching exists (optimal NSW is 0)."""
    _require_xos(inst)
    match = maximum_matching(inst)
    if any(g is None for g in match):
        return None
    return Allocation(tuple(frozenset({g}) for g in match))


def _h_and_g(masks: list[int], i: int, full: int) -> tuple[list[int], int]:
    size_i = masks[i].bit_count()
    heavy = [j for j, mk in enumerate(masks) if mk.bit_count() > 4 * size_i]
    assigned = 0
    for mk in masks:
        assigned |= mk
    goods = (full & ~assigned) | masks[i]
    for j in heavy:
        goods |= masks[j]
    return heavy, goods


def compute_h_and_g(alloc: Allocation, i: int, m: int) -> tuple[frozenset[int], frozenset[int]]:
    """Agents with bundles more than four times larger than agent i's, and G_i.

    G_i is the union of those agents' bundles, the unassigned goods and i's own bundle.
    """
    heavy, goods = _h_and_g(list(alloc.masks), i, full_mask(m))
    return frozenset(heavy), from_mask(goods)


def complete_to_largest(masks: list[int], m: int) -> list[int]:
    """Hand every unassigned good to the largest bundle (lowest index on ties)."""
    out = list(masks)
    rest = full_mask(m)
    for mk in out:
        rest &= ~mk
    if rest:
        k = max(range(len(out)), key=lambda j: (out[j].bit_count(), -j))
        out[k] |= rest
    return out


def _check_invariants(inst: Instance, masks: list[int]) -> None:
    seen = 0
    for i, (spec, mk) in enumerate(zip(inst.valuations, masks)):
        if seen & mk:
            raise InvariantViolation("bundles overlap")
        seen |= mk
        if spec.value(mk) != mk.bit_count():
            raise InvariantViolation(f"agent {i} holds a wasteful bundle")
        if mk == 0:
            raise InvariantViolation(f"agent {i} lost all value")


def solve(inst: Instance, check_invariants: bool = True) -> SolveResult:
    """Run the doubling loop and return the partial allocation, its completion and the trace."""
    _require_xos(inst)
    n, m = inst.n, inst.m
    full = full_mask(m)
    oracles = [CountingOracle(spec, m) for spec in inst.valuations]
    match = maximum_matching(inst, oracles)
    masks = [0 if g is None else 1 << g for g in match]

    def queries() -> int:
        return sum(o.query_count for o in oracles)

    if any(g is None for g in match):
        partial = Allocation.from_masks(masks)
        completed = list(masks)
        completed[0] |= full & ~partial.assigned_mask
        trace = SolveTrace(n, m, tuple(match), (), queries())
        return SolveResult(partial, Allocation.from_masks(completed), trace, "zero_nsw")

    records: list[IterationRecord] = []
    while True:
        if check_invariants:
            _check_invariants(inst, masks)
        actor = None
        for i in range(n):
            heavy, goods = _h_and_g(masks, i, full)
            value_g = oracles[i](goods)
            if 2 * masks[i].bit_count() <= value_g:
                actor = (i, heavy, goods, value_g)
                break
        if actor is None:
            break
        i, heavy, goods, value_g = actor
        before = tuple(mk.bit_count() for mk in masks)
        old = masks[i].bit_count()
        x = extract_nonwasteful_mask(oracles[i], goods, value=value_g)
        x = shrink_mask(oracles[i], x, 2 * old, check=False)
        masks[i] = x
        for j in heavy:
            masks[j] &= ~x
            if check_invariants and masks[j] == 0:
                raise InvariantViolation(f"agent {j} was stripped to an empty bundle")
        after = tuple(mk.bit_count() for mk in masks)
        records.append(
            IterationRecord(
                agent=i,
                old_size=old,
                new_size=x.bit_count(),
                nsw_before=nsw_of_profile(before),
                nsw_after=nsw_of_profile(after),
                values_before=before,
                values_after=after,
            )
        )

    trace = SolveTrace(n, m, tuple(match), tuple(records), queries())
    return SolveResult(
        Allocation.from_masks(masks),
        Allocation.from_masks(complete_to_largest(masks, m)),
        trace,
        "solved",
    )


def pad_with_dummies(inst: Instance) -> Instance:
    """Append ``n - n'`` dummy goods that every agent values at 1 in any non-empty amount.

    ``n'`` is the maximum matching size; solving the padded instance targets the
    variant where as many agents as possible get positive value.
    """
    _require_xos(inst)
    matched = sum(g is not None for g in maximum_matching(inst))
    missing = inst.n - matched
    if missing == 0:
        raise ValueError("instance already has a perfect matching; nothing to pad")
    m = inst.m
    dummies = tuple(frozenset({m + d}) for d in range(missing))
    specs = []
    for spec in inst.valuations:
        family = spec.expand(m) if isinstance(spec, Spectrum) else spec
        assert isinstance(family, XOSFamily)
        specs.append(XOSFamily(family.sets + dummies))
    return Instance(inst.n, m + missing, tuple(specs))
