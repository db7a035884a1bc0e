"""Exhaustive ground-truth oracles: optimal NSW/SW, restricted maximin shares, GMMS.

Everything here enumerates; each entry point takes an explicit ``budget`` on the
number of candidates and raises :class:`BudgetExceeded` rather than approximating.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import Allocation, Instance, check_allocation, from_mask, full_mask, nsw_of_profile, to_mask

DEFAULT_BUDGET = 10**8
BUDGET_ENV = "BINFAIR_ORACLE_BUDGET"
_CHUNK = 1 << 18


class BudgetExceeded(RuntimeError):
    def __init__(self, what: str, required: int, budget: int) -> None:
        super().__init__(f"{what} needs {required} candidates, budget is {budget}")
        self.what = what
        self.required = required
        self.budget = budget


def default_budget() -> int:
    env = os.environ.get(BUDGET_ENV)
    return int(env) if env else DEFAULT_BUDGET


@dataclass(frozen=True)
class MaximinQuery:
    agent: int
    parts: int
    goods: frozenset[int]

    def __post_init__(self) -> None:
        if self.parts < 1:
            raise ValueError("parts must be >= 1")
        object.__setattr__(self, "goods", frozenset(int(g) for g in self.goods))


def assignment_count(inst: Instance) -> int:
    return (inst.n + 1) ** inst.m


def _search(inst: Instance, objective: str, budget: int | None) -> tuple[list[int], object]:
    """Best assignment vector (good 0 most significant, value n meaning A0) and its score."""
    budget = default_budget() if budget is None else budget
    n, m = inst.n, inst.m
    base = n + 1
    total = base**m
    if total > budget:
        raise BudgetExceeded(f"{objective} brute force", total, budget)
    exact_int = n * math.log2(m + 1) < 62
    best_score = None
    best_index = 0
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        rest = idx.copy()
        masks = [np.zeros(len(idx), dtype=np.uint64) for _ in range(n)]
        for g in range(m - 1, -1, -1):
            digit = rest % base
            rest //= base
            bit = np.uint64(1 << g)
            for a in range(n):
                masks[a] |= np.where(digit == a, bit, np.uint64(0))
        vals = [spec.values(mk) for spec, mk in zip(inst.valuations, masks)]
        if objective == "sw":
            score = np.sum(vals, axis=0)
        elif exact_int:
            score = np.prod(vals, axis=0)
        else:
            score = np.ones(len(idx), dtype=object)
            for v in vals:
                score = score * v.astype(object)
        k = int(np.argmax(score))
        if best_score is None or score[k] > best_score:
            best_score = score[k]
            best_index = start + k
    vector = []
    for _ in range(m):
        vector.append(best_index % base)
        best_index //= base
    return vector[::-1], best_score


def _vector_to_allocation(vector: list[int], n: int) -> Allocation:
    bundles = [set() for _ in range(n)]
    for g, a in enumerate(vector):
        if a < n:
            bundles[a].add(g)
    return Allocation(tuple(frozenset(b) for b in bundles))


def brute_force_nsw_opt(inst: Instance, budget: int | None = None) -> tuple[Allocation, float]:
    """Nash-optimal allocation over all ``(n+1)^m`` assignments; ties go to the smallest vector."""
    vector, _ = _search(inst, "nsw", budget)
    alloc = _vector_to_allocation(vector, inst.n)
    profile = tuple(spec.value(mk) for spec, mk in zip(inst.valuations, alloc.masks))
    return alloc, nsw_of_profile(profile)


def brute_force_sw_opt(inst: Instance, budget: int | None = None) -> tuple[Allocation, int]:
    vector, score = _search(inst, "sw", budget)
    return _vector_to_allocation(vector, inst.n), int(score)


def _maximin_mask(spec, mask: int, r: int, budget: int) -> int:
    goods = sorted(from_mask(mask))
    k = len(goods)
    if r == 1:
        return spec.value(mask)
    if r > k:
        return 0
    if r**k > budget:
        raise BudgetExceeded("maximin share", r**k, budget)
    ceiling = k // r
    # parts are interchangeable: pin the first good to part 0
    free = goods[1:]
    total = r ** len(free)
    best = 0
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        parts = [np.zeros(len(idx), dtype=np.uint64) for _ in range(r)]
        parts[0] |= np.uint64(1 << goods[0])
        for g in reversed(free):
            digit = idx % r
            idx //= r
            bit = np.uint64(1 << g)
            for j in range(r):
                parts[j] |= np.where(digit == j, bit, np.uint64(0))
        worst = spec.values(parts[0])
        for j in range(1, r):
            np.minimum(worst, spec.values(parts[j]), out=worst)
        best = max(best, int(worst.max()))
        if best >= ceiling:
            break
    return best


def maximin_share(inst: Instance, query: MaximinQuery, budget: int | None = None) -> int:
    """Exact ``max over r-partitions of S of min_j v_i(P_j)``; empty parts are allowed."""
    budget = default_budget() if budget is None else budget
    mask = to_mask(query.goods)
    if mask >> inst.m:
        raise ValueError(f"query uses a good index >= m={inst.m}")
    return _maximin_mask(inst.valuations[query.agent], mask, query.parts, budget)


def gmms_threshold(inst: Instance, alloc: Allocation, i: int, budget: int | None = None) -> int:
    """Best restricted maximin share of agent i over groups R containing i.

    Each group is scored on its members' bundles plus the unassigned goods.
    """
    budget = default_budget() if budget is None else budget
    check_allocation(inst, alloc)
    spec = inst.valuations[i]
    rest = full_mask(inst.m) & ~alloc.assigned_mask
    others = [j for j in range(inst.n) if j != i]
    best = 0
    for size in range(len(others) + 1):
        for group in itertools.combinations(others, size):
            mask = rest | alloc.masks[i]
            for j in group:
                mask |= alloc.masks[j]
            r = size + 1
            if mask.bit_count() // r <= best:
                continue
            best = max(best, _maximin_mask(spec, mask, r, budget))
    return best


def is_alpha_gmms(
    inst: Instance, alloc: Allocation, alpha: Fraction | int | str, budget: int | None = None
) -> bool:
    """``v_i(A_i) >= alpha * GMMS_i`` for every agent, compared in exact rationals."""
    alpha = Fraction(alpha)
    if alpha <= 0:
        return True
    for i, spec in enumerate(inst.valuations):
        own = spec.value(alloc.masks[i])
        if own * alpha.denominator < alpha.numerator * gmms_threshold(inst, alloc, i, budget):
            return False
    return True

