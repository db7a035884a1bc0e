"""Instance families: the independent-set reduction, the envy-free/NSW gap family,
the planted subadditive pair, and seeded random binary XOS instances."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .core import Allocation, Instance, from_mask, to_mask
from .valuations import PlantedSubadditive, Spectrum, SubadditivePQ, XOSFamily


@dataclass(frozen=True)
class CubicGraph:
    """Simple 3-regular graph; edge ``j`` of ``edges`` becomes good ``j`` in the reduction."""

    vertices: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        object.__setattr__(self, "edges", edges)
        degree = [0] * self.vertices
        seen = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < self.vertices and 0 <= v < self.vertices):
                raise ValueError(f"edge ({u}, {v}) leaves the vertex range")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"parallel edge {key}")
            seen.add(key)
            degree[u] += 1
            degree[v] += 1
        bad = [v for v, d in enumerate(degree) if d != 3]
        if bad:
            raise ValueError(f"graph is not 3-regular; vertices {bad} have degree != 3")

    def incident(self, v: int) -> frozenset[int]:
        return frozenset(j for j, e in enumerate(self.edges) if v in e)

    def to_json(self) -> dict[str, Any]:
        return {"vertices": self.vertices, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> CubicGraph:
        return cls(int(obj["vertices"]), tuple(tuple(e) for e in obj["edges"]))


def k4() -> CubicGraph:
    return CubicGraph(4, ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)))


def petersen() -> CubicGraph:
    """Outer 5-cycle 0..4, spokes i -- i+5, inner pentagram on 5..9."""
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return CubicGraph(10, tuple(outer + spokes + inner))


def max_independent_set(graph: CubicGraph) -> frozenset[int]:
    """Exhaustive search; returns the smallest-bitmask set among the largest ones."""
    adj = [0] * graph.vertices
    for u, v in graph.edges:
        adj[u] |= 1 << v
        adj[v] |= 1 << u
    best = 0
    for mask in range(1 << graph.vertices):
        if mask.bit_count() <= best.bit_count():
            continue
        if all(not (adj[v] & mask) for v in range(graph.vertices) if mask >> v & 1):
            best = mask
    return from_mask(best)


def gen_apx_reduction(graph: CubicGraph, tau: int) -> Instance:
    """``tau`` agents over the edges, all valuing S at the most edges S shares with one vertex."""
    if not 1 <= tau <= graph.vertices:
        raise ValueError(f"tau must lie in [1, {graph.vertices}]")
    family = XOSFamily(tuple(graph.incident(v) for v in range(graph.vertices)))
    return Instance(tau, len(graph.edges), (family,) * tau)


def independent_set_witness(
    graph: CubicGraph, tau: int, independent: frozenset[int] | None = None
) -> Allocation:
    """Give agent k the edges at the k-th vertex of an independent set of size >= tau."""
    if independent is None:
        independent = max_independent_set(graph)
    chosen = sorted(independent)
    if len(chosen) < tau:
        raise ValueError(f"independent set has {len(chosen)} < tau={tau} vertices")
    adj = {(min(u, v), max(u, v)) for u, v in graph.edges}
    for a in chosen:
        for b in chosen:
            if a < b and (a, b) in adj:
                raise ValueError(f"vertices {a} and {b} are adjacent")
    return Allocation(tuple(graph.incident(v) for v in chosen[:tau]))


def apx_gap_factor() -> float:
    """Ratio of the YES-case NSW (3) to the NO-case bound ``3^(94/95) 2^(1/95)``."""
    return 3 / (3 ** (94 / 95) * 2 ** (1 / 95))


def gen_envy_gap(k: int) -> tuple[Instance, Allocation, Allocation]:
    """Instance with 4k agents and 2k+1 blocks of 2k goods, plus an envy-free allocation
    of low Nash welfare and a non-wasteful one of Nash welfare k.

    Good ``t`` of block ``x`` (both 0-based) has index ``2k*x + t``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    w = 2 * k
    m = w * (w + 1)
    blocks = tuple(frozenset(range(x * w, (x + 1) * w)) for x in range(w + 1))
    additive = XOSFamily((frozenset(range(m)),))
    blocky = XOSFamily(blocks)
    inst = Instance(2 * w, m, (additive,) * w + (blocky,) * w)
    envy_free = tuple(frozenset(x * w + i for x in range(w)) for i in range(w)) + tuple(
        frozenset({w * w + j}) for j in range(w)
    )
    high = tuple(frozenset(range(i * w, i * w + k)) for i in range(w)) + tuple(
        frozenset(range(j * w + k, (j + 1) * w)) for j in range(w)
    )
    return inst, Allocation(envy_free), Allocation(high)


def lower_bound_params(n: int, delta: float) -> tuple[int, int]:
    """``p = floor((1+delta) n^(4 delta))`` and ``q = floor(n^(1+2 delta))``."""
    if not 0 < delta < 1 / 16:
        raise ValueError("delta must lie in (0, 1/16)")
    return math.floor((1 + delta) * n ** (4 * delta)), math.floor(n ** (1 + 2 * delta))


def planted_blocks(n: int, seed: int) -> tuple[frozenset[int], ...]:
    perm = np.random.default_rng(seed).permutation(n * n)
    return tuple(frozenset(int(g) for g in perm[i * n : (i + 1) * n]) for i in range(n))


def gen_lower_bound_pair(n: int, p: int, q: int, seed: int) -> tuple[Instance, Instance]:
    """Identical-f instance and planted instance, both with n agents and n^2 goods."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 1 <= p < q:
        raise ValueError(f"need 1 <= p < q, got p={p}, q={q}")
    m = n * n
    identical = Instance(n, m, (SubadditivePQ(p, q),) * n)
    planted = Instance(
        n, m, tuple(PlantedSubadditive(p, q, t) for t in planted_blocks(n, seed))
    )
    return identical, planted


def planted_allocation(planted: Instance) -> Allocation:
    return Allocation(tuple(spec.t for spec in planted.valuations))


BANDS = ("le_p", "p_to_q", "gt_q")


def _band(size: int, p: int, q: int) -> str:
    if size <= p:
        return "le_p"
    if size <= q:
        return "p_to_q"
    return "gt_q"


@dataclass
class ProbeReport:
    n: int
    p: int
    q: int
    seed: int
    rows: list[dict[str, Any]] = field(default_factory=list)

    def band_summary(self) -> dict[str, dict[str, Any]]:
        out: dict[str, dict[str, Any]] = {}
        for row in self.rows:
            b = out.setdefault(row["band"], {"queries": 0, "mismatches": 0})
            b["queries"] += row["queries"]
            b["mismatches"] += row["mismatches"]
        for b in out.values():
            b["fraction"] = b["mismatches"] / b["queries"] if b["queries"] else 0.0
        return {k: out[k] for k in BANDS if k in out}

    def to_json(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "p": self.p,
            "q": self.q,
            "seed": self.seed,
            "rows": self.rows,
            "bands": self.band_summary(),
        }


def distinguish_probe(n: int, p: int, q: int, seed: int, num_queries: int) -> ProbeReport:
    """Monte Carlo estimate of how often a random query separates f from a planted f'_i.

    Cardinalities 1..m are swept round-robin and a uniform subset of each target
    size is drawn, so every band gets coverage.
    """
    _, planted = gen_lower_bound_pair(n, p, q, seed)
    f = SubadditivePQ(p, q)
    m = n * n
    rng = np.random.default_rng([seed, 1])
    counts: dict[int, list[int]] = {}
    for k in range(num_queries):
        size = 1 + k % m
        agent = int(rng.integers(n))
        mask = to_mask(int(g) for g in rng.choice(m, size=size, replace=False))
        hit = planted.valuations[agent].value(mask) != f.value(mask)
        c = counts.setdefault(size, [0, 0])
        c[0] += 1
        c[1] += hit
    rows = [
        {"cardinality": s, "band": _band(s, p, q), "queries": c[0], "mismatches": c[1]}
        for s, c in sorted(counts.items())
    ]
    return ProbeReport(n, p, q, seed, rows)


def gen_random_xos(
    n: int,
    m: int,
    family_size: int,
    max_set_size: int,
    seed: int,
    min_set_size: int = 1,
) -> Instance:
    """Each agent gets ``family_size`` uniform random sets with sizes uniform in
    ``[min_set_size, max_set_size]``."""
    if min(n, m, family_size, max_set_size) < 1:
        raise ValueError("parameters must be positive")
    if not 0 <= min_set_size <= max_set_size <= m:
        raise ValueError("need 0 <= min_set_size <= max_set_size <= m")
    rng = np.random.default_rng(seed)
    specs = []
    for _ in range(n):
        sets = []
        for _ in range(family_size):
            size = int(rng.integers(min_set_size, max_set_size + 1))
            sets.append(frozenset(int(g) for g in rng.choice(m, size=size, replace=False)))
        specs.append(XOSFamily(tuple(sets)))
    return Instance(n, m, tuple(specs))


def gen_spectrum(n: int, m: int, delta: int) -> Instance:
    return Instance(n, m, (Spectrum(delta),) * n)
