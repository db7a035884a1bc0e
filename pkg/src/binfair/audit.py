"""Certified checks for an (instance, allocation) pair and the desk-scale study corpus.

Pass/fail always comes from exact integer or rational comparisons; the float
ratios in a report are for reading only.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Iterator

import numpy as np

from .core import (
    Allocation,
    Instance,
    check_allocation,
    full_mask,
    nash_product,
    nsw_of_profile,
    value_profile,
)
from .generators import gen_random_xos
from .nsw_alg import SolveTrace, _h_and_g, maximum_matching, solve
from .oracles import (
    BudgetExceeded,
    brute_force_nsw_opt,
    brute_force_sw_opt,
    default_budget,
    is_alpha_gmms,
)

NSW_FACTOR = 288
GMMS_ALPHA = Fraction(1, 6)
COUNTING_ALPHAS = (1, 2, 4, 8)


def termination_flags(inst: Instance, alloc: Allocation) -> list[bool]:
    """Per agent, whether ``2 v_i(A_i) > v_i(G_i)`` (the loop's exit condition)."""
    masks = list(alloc.masks)
    full = full_mask(inst.m)
    flags = []
    for i, spec in enumerate(inst.valuations):
        _, goods = _h_and_g(masks, i, full)
        flags.append(2 * spec.value(masks[i]) > spec.value(goods))
    return flags


def nsw_bound_holds(profile: tuple[int, ...], opt_profile: tuple[int, ...], factor: int = NSW_FACTOR) -> bool:
    """``NSW(A) >= NSW(OPT) / factor`` via ``factor^n prod(A) >= prod(OPT)``."""
    return factor ** len(profile) * nash_product(profile) >= nash_product(opt_profile)


def sw_bound_holds(sw: int, sw_opt: int) -> bool:
    """``sw * (3 + 2 sqrt 2) >= sw_opt`` decided without floating point."""
    gap = sw_opt - 3 * sw
    if gap <= 0:
        return True
    return 8 * sw * sw >= gap * gap


def counting_bound_holds(profile: tuple[int, ...], opt_profile: tuple[int, ...], alphas=COUNTING_ALPHAS) -> bool:
    """At most ``n / alpha`` agents get less than a ``1/(18 alpha)`` share of their optimal value."""
    n = len(profile)
    for alpha in alphas:
        bad = sum(18 * alpha * a < o for a, o in zip(profile, opt_profile))
        if alpha * bad > n:
            return False
    return True


def gmms_cost(inst: Instance, alloc: Allocation) -> int:
    """Upper bound on labelings a full GMMS audit enumerates."""
    rest = full_mask(inst.m) & ~alloc.assigned_mask
    total = 0
    for i in range(inst.n):
        others = [j for j in range(inst.n) if j != i]
        for size in range(len(others) + 1):
            for group in itertools.combinations(others, size):
                k = (rest | alloc.masks[i] | sum(alloc.masks[j] for j in group)).bit_count()
                total += (size + 1) ** k
    return total


@dataclass
class AuditReport:
    termination_ok: list[bool]
    non_wasteful_ok: bool
    values: list[int]
    nsw: float
    sw: int
    iterations: int | None = None
    growth_ok: bool | None = None
    query_count: int | None = None
    nsw_opt: float | None = None
    sw_opt: int | None = None
    nsw_ratio: float | None = None
    sw_ratio: float | None = None
    nsw_bound_ok: bool | None = None
    sw_bound_ok: bool | None = None
    lemma1_ok: bool | None = None  # counting bound; name fixed by the report schema
    gmms_alpha_ok: bool | None = None

    _ORACLE_FIELDS = (
        "nsw_opt", "sw_opt", "nsw_ratio", "sw_ratio",
        "nsw_bound_ok", "sw_bound_ok", "lemma1_ok", "gmms_alpha_ok",
    )

    @property
    def passed(self) -> bool:
        checks = [all(self.termination_ok), self.non_wasteful_ok]
        checks += [
            v for v in (self.growth_ok, self.nsw_bound_ok, self.sw_bound_ok,
                        self.lemma1_ok, self.gmms_alpha_ok)
            if v is not None
        ]
        return all(checks)

    def to_json(self) -> dict[str, Any]:
        out = asdict(self)
        for key in self._ORACLE_FIELDS:
            if out[key] is None:
                del out[key]
        out["passed"] = self.passed
        return out


def audit(
    inst: Instance,
    alloc: Allocation,
    trace: SolveTrace | None = None,
    budget: int | None = None,
) -> AuditReport:
    """Run every local check, and the brute-force ones the budget allows."""
    budget = default_budget() if budget is None else budget
    check_allocation(inst, alloc)
    profile = value_profile(inst, alloc)
    report = AuditReport(
        termination_ok=termination_flags(inst, alloc),
        non_wasteful_ok=all(v == len(b) for v, b in zip(profile, alloc.bundles)),
        values=list(profile),
        nsw=nsw_of_profile(profile),
        sw=sum(profile),
    )
    if trace is not None:
        report.iterations = len(trace.iterations)
        report.growth_ok = trace.growth_ok() and trace.within_iteration_bound()
        report.query_count = trace.total_value_queries
    if budget <= 0:
        return report
    try:
        nsw_alloc, nsw_opt = brute_force_nsw_opt(inst, budget)
        _, sw_opt = brute_force_sw_opt(inst, budget)
    except BudgetExceeded:
        pass
    else:
        opt_profile = value_profile(inst, nsw_alloc)
        report.nsw_opt = nsw_opt
        report.sw_opt = sw_opt
        if nsw_opt > 0:
            report.nsw_ratio = report.nsw / nsw_opt
            report.nsw_bound_ok = nsw_bound_holds(profile, opt_profile)
            report.lemma1_ok = counting_bound_holds(profile, opt_profile)
        if sw_opt > 0:
            report.sw_ratio = report.sw / sw_opt
            report.sw_bound_ok = sw_bound_holds(report.sw, sw_opt)
    if gmms_cost(inst, alloc) <= budget:
        report.gmms_alpha_ok = is_alpha_gmms(inst, alloc, GMMS_ALPHA, budget)
    return report


@dataclass
class CorpusRow:
    seed: int
    n: int
    m: int
    iterations: int
    queries: int
    nsw: float
    nsw_opt: float
    sw: int
    sw_opt: int
    nsw_ratio: float
    sw_ratio: float
    nsw_bound_ok: bool
    sw_bound_ok: bool
    counting_bound_ok: bool
    growth_ok: bool
    iteration_bound_ok: bool
    gmms_ok: bool | None
    nsw_trajectory: list[float] = field(default_factory=list, repr=False)


def corpus_instances(count: int = 200, start_seed: int = 0, max_m: int = 7) -> Iterator[tuple[int, Instance]]:
    """Seeded random binary XOS instances with n in {2, 3}, m <= max_m and positive optimal NSW."""
    seed = start_seed
    produced = 0
    while produced < count:
        rng = np.random.default_rng([seed, 7])
        n = int(rng.integers(2, 4))
        m = int(rng.integers(n, max_m + 1))
        family_size = int(rng.integers(1, 4))
        max_set = int(rng.integers(1, m + 1))
        inst = gen_random_xos(n, m, family_size, max_set, seed)
        if all(g is not None for g in maximum_matching(inst)):
            produced += 1
            yield seed, inst
        seed += 1


def corpus_row(seed: int, inst: Instance, gmms_max_m: int = 6) -> CorpusRow:
    res = solve(inst)
    profile = value_profile(inst, res.allocation)
    nsw_alloc, nsw_opt = brute_force_nsw_opt(inst)
    opt_profile = value_profile(inst, nsw_alloc)
    _, sw_opt = brute_force_sw_opt(inst)
    sw = sum(profile)
    trace = res.trace
    gmms = None
    if inst.n <= 3 and inst.m <= gmms_max_m:
        gmms = is_alpha_gmms(inst, res.allocation, GMMS_ALPHA)
    traj = [1.0] + [r.nsw_after for r in trace.iterations]
    return CorpusRow(
        seed=seed,
        n=inst.n,
        m=inst.m,
        iterations=len(trace.iterations),
        queries=trace.total_value_queries,
        nsw=nsw_of_profile(profile),
        nsw_opt=nsw_opt,
        sw=sw,
        sw_opt=sw_opt,
        nsw_ratio=nsw_of_profile(profile) / nsw_opt,
        sw_ratio=sw / sw_opt,
        nsw_bound_ok=nsw_bound_holds(profile, opt_profile),
        sw_bound_ok=sw_bound_holds(sw, sw_opt),
        counting_bound_ok=counting_bound_holds(profile, opt_profile),
        growth_ok=trace.growth_ok(),
        iteration_bound_ok=trace.within_iteration_bound(),
        gmms_ok=gmms,
        nsw_trajectory=traj,
    )


def run_corpus(count: int = 200, start_seed: int = 0) -> list[CorpusRow]:
    return [corpus_row(seed, inst) for seed, inst in corpus_instances(count, start_seed)]
