"""Instances, allocations and the welfare/fairness predicates shared by every module.

Goods and agents are 0-based throughout: good ``g`` here is good ``g + 1`` in
1-based notation.  Good subsets are handled internally as Python ``int``
bitmasks (bit ``g`` set iff good ``g`` is in the set); ints are unbounded, so
the same representation covers ``m <= 64`` and larger ground sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, Iterable, Sequence

if TYPE_CHECKING:
    from .valuations import ValuationSpec

ValueProfile = tuple[int, ...]


class DimensionError(ValueError):
    """Allocation and instance disagree on the number of agents or goods."""


class InvalidAllocation(ValueError):
    """Bundles overlap or reference goods outside the instance."""


def to_mask(goods: Iterable[int] | int) -> int:
    if isinstance(goods, int):
        if goods < 0:
            raise ValueError("bitmask must be non-negative")
        return goods
    mask = 0
    for g in goods:
        g = int(g)
        if g < 0:
            raise ValueError(f"negative good index {g}")
        mask |= 1 << g
    return mask


def from_mask(mask: int) -> frozenset[int]:
    out = []
    g = 0
    while mask:
        if mask & 1:
            out.append(g)
        mask >>= 1
        g += 1
    return frozenset(out)


def full_mask(m: int) -> int:
    return (1 << m) - 1


@dataclass(frozen=True)
class Instance:
    num_agents: int
    num_goods: int
    valuations: tuple[ValuationSpec, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "valuations", tuple(self.valuations))
        if self.num_agents < 1 or self.num_goods < 1:
            raise ValueError("an instance needs at least one agent and one good")
        if len(self.valuations) != self.num_agents:
            raise ValueError(
                f"expected {self.num_agents} valuations, got {len(self.valuations)}"
            )
        for spec in self.valuations:
            spec.validate(self.num_goods)

    @property
    def n(self) -> int:
        return self.num_agents

    @property
    def m(self) -> int:
        return self.num_goods

    def value(self, agent: int, goods: Iterable[int] | int) -> int:
        mask = to_mask(goods)
        if mask >> self.num_goods:
            raise InvalidAllocation(f"good index >= m={self.num_goods}")
        return self.valuations[agent].value(mask)


@dataclass(frozen=True)
class Allocation:
    """``n`` pairwise-disjoint bundles; goods outside every bundle form A0."""

    bundles: tuple[frozenset[int], ...]
    masks: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        bundles = tuple(frozenset(int(g) for g in b) for b in self.bundles)
        object.__setattr__(self, "bundles", bundles)
        masks = tuple(to_mask(b) for b in bundles)
        seen = 0
        for mask in masks:
            if seen & mask:
                raise InvalidAllocation("bundles are not pairwise disjoint")
            seen |= mask
        object.__setattr__(self, "masks", masks)

    @classmethod
    def from_masks(cls, masks: Sequence[int]) -> Allocation:
        return cls(tuple(from_mask(mk) for mk in masks))

    @classmethod
    def empty(cls, n: int) -> Allocation:
        return cls(tuple(frozenset() for _ in range(n)))

    def __len__(self) -> int:
        return len(self.bundles)

    @cached_property
    def assigned_mask(self) -> int:
        out = 0
        for mk in self.masks:
            out |= mk
        return out

    def unassigned(self, m: int) -> frozenset[int]:
        """A0, recomputed on every call."""
        return from_mask(full_mask(m) & ~self.assigned_mask)

    def unassigned_mask(self, m: int) -> int:
        return full_mask(m) & ~self.assigned_mask

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.bundles)

    def as_lists(self) -> list[list[int]]:
        return [sorted(b) for b in self.bundles]


def check_allocation(inst: Instance, alloc: Allocation) -> None:
    if len(alloc) != inst.num_agents:
        raise DimensionError(
            f"allocation has {len(alloc)} bundles for {inst.num_agents} agents"
        )
    if alloc.assigned_mask >> inst.num_goods:
        raise InvalidAllocation(f"allocation uses a good index >= m={inst.num_goods}")


def value_profile(inst: Instance, alloc: Allocation) -> ValueProfile:
    check_allocation(inst, alloc)
    return tuple(
        spec.value(mask) for spec, mask in zip(inst.valuations, alloc.masks)
    )


def nash_product(profile: Sequence[int]) -> int:
    """Exact product of the values; the n-th power of the Nash welfare."""
    return math.prod(int(v) for v in profile)


def nsw_of_profile(profile: Sequence[int]) -> float:
    if any(v == 0 for v in profile):
        return 0.0
    return math.exp(math.fsum(math.log(v) for v in profile) / len(profile))


def nash_welfare(inst: Instance, alloc: Allocation) -> float:
    """Geometric mean of the agents' bundle values (exactly 0 if any value is 0)."""
    return nsw_of_profile(value_profile(inst, alloc))


def social_welfare(inst: Instance, alloc: Allocation) -> int:
    return sum(value_profile(inst, alloc))


def is_envy_free(inst: Instance, alloc: Allocation) -> bool:
    check_allocation(inst, alloc)
    for i, spec in enumerate(inst.valuations):
        own = spec.value(alloc.masks[i])
        if any(spec.value(other) > own for other in alloc.masks):
            return False
    return True


def is_non_wasteful(inst: Instance, alloc: Allocation) -> bool:
    """True iff every bundle's value equals its cardinality."""
    profile = value_profile(inst, alloc)
    return all(v == len(b) for v, b in zip(profile, alloc.bundles))
