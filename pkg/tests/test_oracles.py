from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from binfair.core import Allocation, Instance, nash_product, value_profile
from binfair.generators import gen_apx_reduction, gen_envy_gap, gen_random_xos, k4
from binfair.nsw_alg import solve
from binfair.oracles import (
    BudgetExceeded,
    MaximinQuery,
    brute_force_nsw_opt,
    brute_force_sw_opt,
    gmms_threshold,
    is_alpha_gmms,
    maximin_share,
)
from binfair.valuations import SubadditivePQ, XOSFamily, extract_nonwasteful

# Frozen from the plain-python enumerators below at first run.
ENVY_GAP_K1_OPT_PRODUCT = 4
ENVY_GAP_K1_OPT_VECTOR = (0, 0, 1, 1, 2, 3)
ENVY_GAP_K1_P_GMMS = (2, 2, 1, 1)


def naive_best(inst: Instance, score):
    """Reference enumerator: itertools over assignment vectors, first maximum wins."""
    best = None
    for vector in itertools.product(range(inst.n + 1), repeat=inst.m):
        bundles = [{g for g, a in enumerate(vector) if a == i} for i in range(inst.n)]
        value = score([inst.value(i, b) for i, b in enumerate(bundles)])
        if best is None or value > best[0]:
            best = (value, vector)
    return best


def naive_mu(inst: Instance, agent: int, goods, r: int) -> int:
    goods = sorted(goods)
    best = 0
    for labels in itertools.product(range(r), repeat=len(goods)):
        parts = [{g for g, lab in zip(goods, labels) if lab == j} for j in range(r)]
        best = max(best, min(inst.value(agent, p) for p in parts))
    return best


def naive_gmms(inst: Instance, alloc: Allocation, i: int) -> int:
    rest = alloc.unassigned(inst.m)
    others = [j for j in range(inst.n) if j != i]
    best = 0
    for size in range(len(others) + 1):
        for group in itertools.combinations(others, size):
            goods = set(rest) | alloc.bundles[i]
            for j in group:
                goods |= alloc.bundles[j]
            best = max(best, naive_mu(inst, i, goods, size + 1))
    return best


def vector_of(alloc: Allocation, m: int) -> tuple[int, ...]:
    owner = [len(alloc)] * m
    for i, b in enumerate(alloc.bundles):
        for g in b:
            owner[g] = i
    return tuple(owner)


@st.composite
def tiny_instances(draw):
    n = draw(st.integers(1, 3))
    m = draw(st.integers(1, 5))
    return gen_random_xos(n, m, draw(st.integers(1, 3)), draw(st.integers(1, m)), draw(st.integers(0, 10**6)))


class TestNswOpt:
    def test_single_good(self):
        inst = Instance(1, 1, (XOSFamily(({0},)),))
        assert brute_force_nsw_opt(inst)[1] == 1.0

    def test_envy_gap_k1_fixture(self):
        inst, _, _ = gen_envy_gap(1)
        alloc, value = brute_force_nsw_opt(inst)
        assert nash_product(value_profile(inst, alloc)) == ENVY_GAP_K1_OPT_PRODUCT
        assert vector_of(alloc, inst.m) == ENVY_GAP_K1_OPT_VECTOR
        assert value == pytest.approx(math.sqrt(2), rel=1e-12)
        # at least k = 1 by the half-block allocation
        assert value >= 1

    def test_envy_gap_k1_matches_reference(self):
        inst, _, _ = gen_envy_gap(1)
        product, vector = naive_best(inst, math.prod)
        assert (product, vector) == (ENVY_GAP_K1_OPT_PRODUCT, ENVY_GAP_K1_OPT_VECTOR)

    def test_two_identical_agents(self):
        fam = XOSFamily(({0}, {1}))
        inst = Instance(2, 2, (fam, fam))
        alloc, value = brute_force_nsw_opt(inst)
        assert value == 1.0
        assert value_profile(inst, alloc) == (1, 1)

    @settings(max_examples=80, deadline=None)
    @given(tiny_instances())
    def test_matches_reference_enumerator(self, inst):
        product, vector = naive_best(inst, math.prod)
        alloc, _ = brute_force_nsw_opt(inst)
        assert nash_product(value_profile(inst, alloc)) == product
        assert vector_of(alloc, inst.m) == vector

    @pytest.mark.parametrize("seed", range(10))
    def test_dominates_random_allocations(self, seed):
        inst = gen_random_xos(3, 7, 2, 5, seed)
        best = nash_product(value_profile(inst, brute_force_nsw_opt(inst)[0]))
        rng = np.random.default_rng(seed)
        for _ in range(100):
            owners = rng.integers(0, inst.n + 1, size=inst.m)
            alloc = Allocation(tuple(frozenset(np.flatnonzero(owners == i).tolist()) for i in range(inst.n)))
            assert nash_product(value_profile(inst, alloc)) <= best

    @pytest.mark.parametrize("seed", range(10))
    def test_optimum_reachable_with_non_wasteful_bundles(self, seed):
        inst = gen_random_xos(3, 6, 3, 4, seed)
        alloc, _ = brute_force_nsw_opt(inst)
        trimmed = Allocation(
            tuple(extract_nonwasteful(spec, b) for spec, b in zip(inst.valuations, alloc.bundles))
        )
        assert value_profile(inst, trimmed) == value_profile(inst, alloc)
        assert all(v == len(b) for v, b in zip(value_profile(inst, trimmed), trimmed.bundles))

    def test_overflow_path_uses_exact_integers(self):
        # n log2(m+1) >= 62 switches the product to Python ints
        fam = XOSFamily((frozenset(range(2)),))
        inst = Instance(40, 2, (fam,) * 40)
        alloc, value = brute_force_nsw_opt(inst)
        assert value == 0.0
        # every assignment scores 0, so the smallest vector wins
        assert vector_of(alloc, 2) == (0, 0)

    def test_budget(self):
        inst = gen_random_xos(3, 8, 1, 8, 0)
        with pytest.raises(BudgetExceeded) as exc:
            brute_force_nsw_opt(inst, budget=1000)
        assert exc.value.required == 4**8

    def test_budget_from_environment(self, monkeypatch):
        monkeypatch.setenv("BINFAIR_ORACLE_BUDGET", "10")
        with pytest.raises(BudgetExceeded):
            brute_force_nsw_opt(gen_random_xos(2, 4, 1, 4, 0))


class TestSwOpt:
    def test_single_agent_takes_all(self):
        inst = Instance(1, 4, (XOSFamily(({0, 1}, {2})),))
        assert brute_force_sw_opt(inst)[1] == 2

    def test_k4_reduction(self):
        assert brute_force_sw_opt(gen_apx_reduction(k4(), 1))[1] == 3

    def test_shared_good(self):
        fam = XOSFamily(({0},))
        assert brute_force_sw_opt(Instance(2, 1, (fam, fam)))[1] == 1

    @settings(max_examples=80, deadline=None)
    @given(tiny_instances())
    def test_matches_reference_enumerator(self, inst):
        total, vector = naive_best(inst, sum)
        alloc, value = brute_force_sw_opt(inst)
        assert value == total
        assert vector_of(alloc, inst.m) == vector


class TestMaximin:
    def test_one_part(self):
        inst = Instance(1, 4, (XOSFamily(({0, 1, 3},)),))
        assert maximin_share(inst, MaximinQuery(0, 1, frozenset(range(4)))) == 3

    def test_more_parts_than_goods(self):
        inst = Instance(1, 4, (XOSFamily((frozenset(range(4)),)),))
        assert maximin_share(inst, MaximinQuery(0, 3, frozenset({0, 1}))) == 0

    def test_two_parts_of_four(self):
        inst = Instance(1, 4, (XOSFamily((frozenset(range(4)),)),))
        assert maximin_share(inst, MaximinQuery(0, 2, frozenset(range(4)))) == 2

    def test_bad_parts(self):
        with pytest.raises(ValueError):
            MaximinQuery(0, 0, frozenset())

    def test_budget(self):
        inst = Instance(1, 12, (XOSFamily((frozenset(range(12)),)),))
        with pytest.raises(BudgetExceeded):
            maximin_share(inst, MaximinQuery(0, 3, frozenset(range(12))), budget=1000)

    def test_works_for_subadditive(self):
        inst = Instance(1, 6, (SubadditivePQ(1, 3),))
        got = maximin_share(inst, MaximinQuery(0, 2, frozenset(range(6))))
        assert got == naive_mu(inst, 0, range(6), 2)

    @settings(max_examples=80, deadline=None)
    @given(tiny_instances(), st.integers(1, 4), st.frozensets(st.integers(0, 4)))
    def test_matches_reference(self, inst, r, goods):
        goods = frozenset(g for g in goods if g < inst.m)
        assert maximin_share(inst, MaximinQuery(0, r, goods)) == naive_mu(inst, 0, goods, r)

    @settings(max_examples=60, deadline=None)
    @given(tiny_instances(), st.integers(1, 3), st.frozensets(st.integers(0, 4)), st.integers(0, 4))
    def test_monotone(self, inst, r, goods, extra):
        goods = frozenset(g for g in goods if g < inst.m)
        q = lambda parts, s: maximin_share(inst, MaximinQuery(0, parts, s))  # noqa: E731
        assert q(r + 1, goods) <= q(r, goods)
        if extra < inst.m:
            assert q(r, goods) <= q(r, goods | {extra})


class TestGmms:
    def test_single_agent(self):
        inst = Instance(1, 3, (XOSFamily(({0, 2},)),))
        assert gmms_threshold(inst, Allocation((frozenset(),)), 0) == 2

    def test_own_bundle_lower_bound(self):
        inst = Instance(2, 3, (XOSFamily(({0},)), XOSFamily(({1, 2},))))
        alloc = Allocation((frozenset({0}), frozenset({1, 2})))
        assert gmms_threshold(inst, alloc, 0) >= 1

    def test_envy_gap_k1_fixture(self):
        inst, p_alloc, _ = gen_envy_gap(1)
        got = tuple(gmms_threshold(inst, p_alloc, i) for i in range(inst.n))
        assert got == ENVY_GAP_K1_P_GMMS
        assert got == tuple(naive_gmms(inst, p_alloc, i) for i in range(inst.n))

    @pytest.mark.parametrize("seed", range(12))
    def test_matches_reference(self, seed):
        inst = gen_random_xos(3, 5, 2, 4, seed)
        res = solve(inst)
        alloc = res.allocation if res.status == "solved" else Allocation.empty(3)
        for i in range(inst.n):
            assert gmms_threshold(inst, alloc, i) == naive_gmms(inst, alloc, i)

    @pytest.mark.parametrize("seed", range(12))
    def test_dominates_mms(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 4))
        m = int(rng.integers(n, 7))
        inst = gen_random_xos(n, m, 2, m, seed)
        owners = rng.integers(0, n, size=m)
        alloc = Allocation(tuple(frozenset(np.flatnonzero(owners == i).tolist()) for i in range(n)))
        for i in range(n):
            mms = maximin_share(inst, MaximinQuery(i, n, frozenset(range(m))))
            assert gmms_threshold(inst, alloc, i) >= mms


class TestAlphaGmms:
    def test_zero_alpha(self):
        inst = Instance(2, 2, (XOSFamily(({0, 1},)),) * 2)
        assert is_alpha_gmms(inst, Allocation((frozenset({0, 1}), frozenset())), 0)

    @pytest.mark.parametrize("seed", range(20))
    def test_alg_output(self, seed):
        inst = gen_random_xos(3, 7, 2, 5, seed)
        res = solve(inst)
        if res.status == "solved":
            assert is_alpha_gmms(inst, res.allocation, Fraction(1, 6))

    def test_empty_handed_agent(self):
        inst = Instance(2, 2, (XOSFamily(({0, 1},)),) * 2)
        alloc = Allocation((frozenset({0, 1}), frozenset()))
        assert gmms_threshold(inst, alloc, 1) >= 1
        assert not is_alpha_gmms(inst, alloc, Fraction(1, 6))

    def test_exact_rational_boundary(self):
        # value 1 against threshold 6 sits exactly on alpha = 1/6
        inst = Instance(2, 13, (XOSFamily((frozenset(range(13)),)),) * 2)
        alloc = Allocation((frozenset({0}), frozenset(range(1, 13))))
        assert gmms_threshold(inst, alloc, 0) == 6
        assert is_alpha_gmms(inst, alloc, "1/6")
        assert not is_alpha_gmms(inst, alloc, Fraction(1, 6) + Fraction(1, 10**12))
