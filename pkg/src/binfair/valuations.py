"""Binary-marginal valuation families, the value-oracle wrapper and exhaustive class checkers.

Every valuation maps a good bitmask to a non-negative integer.  ``value``
answers one query; ``values`` evaluates a whole ``uint64`` array of masks at
once and is what the exhaustive checkers and brute-force oracles use.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Any, Iterable, Union

import numpy as np

from .core import from_mask, full_mask, to_mask

MARGINALS_LIMIT = 14
SUBADDITIVE_LIMIT = 10
P2_LIMIT = 14

_U64 = np.uint64
_ALL64 = (1 << 64) - 1


class UnsupportedValuation(TypeError):
    """The operation needs a binary XOS valuation and got another class."""


class ExhaustiveLimitError(ValueError):
    """Ground set too large for an exhaustive check."""


def _popcount(arr: np.ndarray) -> np.ndarray:
    return np.bitwise_count(arr).astype(np.int64)


def _pq_value(size: int, p: int, q: int) -> int:
    if size <= p:
        return size
    if size <= q:
        return p
    return -(-p * size // q)


def _pq_values(sizes: np.ndarray, p: int, q: int) -> np.ndarray:
    ceil = -(-p * sizes // q)
    return np.where(sizes <= p, sizes, np.where(sizes <= q, p, ceil))


class ValuationSpec:
    """Base class for valuation descriptions.  Subclasses are frozen dataclasses."""

    kind: str = "abstract"
    is_binary_xos: bool = False

    def value(self, mask: int) -> int:
        raise NotImplementedError

    def values(self, masks: np.ndarray) -> np.ndarray:
        return np.fromiter((self.value(int(x)) for x in masks), dtype=np.int64, count=len(masks))

    def validate(self, m: int) -> None:
        pass

    def to_json(self) -> dict[str, Any]:
        raise NotImplementedError(f"{type(self).__name__} has no JSON encoding")


@dataclass(frozen=True)
class XOSFamily(ValuationSpec):
    """``v(S) = max_F |S & F|`` over a non-empty family of good sets."""

    sets: tuple[frozenset[int], ...]

    kind = "xos_family"
    is_binary_xos = True

    def __post_init__(self) -> None:
        sets = tuple(frozenset(int(g) for g in s) for s in self.sets)
        if not sets:
            raise ValueError("xos_family must be non-empty; use [[]] for the zero valuation")
        object.__setattr__(self, "sets", sets)
        object.__setattr__(self, "_masks", tuple(to_mask(s) for s in sets))

    def value(self, mask: int) -> int:
        return max((mask & f).bit_count() for f in self._masks)

    def values(self, masks: np.ndarray) -> np.ndarray:
        masks = np.asarray(masks, dtype=_U64)
        out = np.zeros(masks.shape, dtype=np.int64)
        for f in self._masks:
            if f > _ALL64:
                return super().values(masks)
            np.maximum(out, _popcount(masks & _U64(f)), out=out)
        return out

    def validate(self, m: int) -> None:
        for f in self._masks:
            if f >> m:
                raise ValueError(f"xos_family set uses a good index >= m={m}")

    def to_json(self) -> dict[str, Any]:
        return {"type": self.kind, "sets": [sorted(s) for s in self.sets]}


@dataclass(frozen=True)
class Spectrum(ValuationSpec):
    """Most goods of ``S`` inside one index window ``[t, t + delta]``."""

    delta: int

    kind = "spectrum"
    is_binary_xos = True

    def __post_init__(self) -> None:
        if self.delta < 0:
            raise ValueError("spectrum delta must be >= 0")

    def value(self, mask: int) -> int:
        goods = sorted(from_mask(mask))
        best = lo = 0
        for hi, g in enumerate(goods):
            while g - goods[lo] > self.delta:
                lo += 1
            best = max(best, hi - lo + 1)
        return best

    def values(self, masks: np.ndarray) -> np.ndarray:
        masks = np.asarray(masks, dtype=_U64)
        if self.delta >= 63:
            return _popcount(masks)
        width = (1 << (self.delta + 1)) - 1
        out = np.zeros(masks.shape, dtype=np.int64)
        for t in range(64):
            np.maximum(out, _popcount(masks & _U64((width << t) & _ALL64)), out=out)
        return out

    def windows(self, m: int) -> tuple[frozenset[int], ...]:
        if m <= self.delta + 1:
            return (frozenset(range(m)),)
        return tuple(frozenset(range(t, t + self.delta + 1)) for t in range(m - self.delta))

    def expand(self, m: int) -> XOSFamily:
        """The equivalent set-family form over ``m`` goods."""
        return XOSFamily(self.windows(m))

    def to_json(self) -> dict[str, Any]:
        return {"type": self.kind, "delta": self.delta}


@dataclass(frozen=True)
class SubadditivePQ(ValuationSpec):
    """Cardinality function: ``|S|`` up to p, flat at p up to q, then ``ceil(p|S|/q)``."""

    p: int
    q: int

    kind = "subadditive_pq"

    def __post_init__(self) -> None:
        if not 1 <= self.p < self.q:
            raise ValueError(f"need 1 <= p < q, got p={self.p}, q={self.q}")

    def value(self, mask: int) -> int:
        return _pq_value(mask.bit_count(), self.p, self.q)

    def values(self, masks: np.ndarray) -> np.ndarray:
        return _pq_values(_popcount(np.asarray(masks, dtype=_U64)), self.p, self.q)

    def to_json(self) -> dict[str, Any]:
        return {"type": self.kind, "p": self.p, "q": self.q}


@dataclass(frozen=True)
class PlantedSubadditive(ValuationSpec):
    """``max(f(S), |S & T|)`` for the (p, q) cardinality function f and a planted set T."""

    p: int
    q: int
    t: frozenset[int]

    kind = "planted_subadditive"

    def __post_init__(self) -> None:
        if not 1 <= self.p < self.q:
            raise ValueError(f"need 1 <= p < q, got p={self.p}, q={self.q}")
        object.__setattr__(self, "t", frozenset(int(g) for g in self.t))
        object.__setattr__(self, "_tmask", to_mask(self.t))

    def value(self, mask: int) -> int:
        return max(_pq_value(mask.bit_count(), self.p, self.q), (mask & self._tmask).bit_count())

    def values(self, masks: np.ndarray) -> np.ndarray:
        masks = np.asarray(masks, dtype=_U64)
        if self._tmask > _ALL64:
            return super().values(masks)
        base = _pq_values(_popcount(masks), self.p, self.q)
        return np.maximum(base, _popcount(masks & _U64(self._tmask)))

    def validate(self, m: int) -> None:
        if self._tmask >> m:
            raise ValueError(f"planted set uses a good index >= m={m}")

    def to_json(self) -> dict[str, Any]:
        return {"type": self.kind, "p": self.p, "q": self.q, "t": sorted(self.t)}


def spec_from_json(obj: dict[str, Any]) -> ValuationSpec:
    kind = obj.get("type")
    if kind == "xos_family":
        return XOSFamily(tuple(obj["sets"]))
    if kind == "spectrum":
        return Spectrum(int(obj["delta"]))
    if kind == "subadditive_pq":
        return SubadditivePQ(int(obj["p"]), int(obj["q"]))
    if kind == "planted_subadditive":
        return PlantedSubadditive(int(obj["p"]), int(obj["q"]), frozenset(obj["t"]))
    raise ValueError(f"unknown valuation type {kind!r}")


class CountingOracle:
    """Value oracle over ``m`` goods that counts every query it answers."""

    def __init__(self, spec: ValuationSpec, m: int) -> None:
        self.spec = spec
        self.m = m
        self._count = 0
        self._lock = threading.Lock()

    def __call__(self, goods: Iterable[int] | int) -> int:
        mask = to_mask(goods)
        if mask >> self.m:
            raise ValueError(f"query uses a good index >= m={self.m}")
        with self._lock:
            self._count += 1
        return self.spec.value(mask)

    @property
    def query_count(self) -> int:
        return self._count

    def __repr__(self) -> str:
        return f"CountingOracle({self.spec!r}, m={self.m}, queries={self._count})"


Valuation = Union[ValuationSpec, CountingOracle]


def query_count(oracle: CountingOracle) -> int:
    return oracle.query_count


def evaluate(spec: ValuationSpec, goods: Iterable[int] | int, m: int | None = None) -> int:
    mask = to_mask(goods)
    if m is not None and mask >> m:
        raise ValueError(f"set uses a good index >= m={m}")
    return spec.value(mask)


def _query_fn(valuation: Valuation):
    if isinstance(valuation, CountingOracle):
        return valuation.spec, valuation
    return valuation, valuation.value


def extract_nonwasteful_mask(valuation: Valuation, mask: int, value: int | None = None) -> int:
    """Mask form of :func:`extract_nonwasteful`.

    ``value`` may carry an already-known ``v(S)`` so the initial query is skipped.
    """
    spec, query = _query_fn(valuation)
    if not spec.is_binary_xos:
        raise UnsupportedValuation(
            f"non-wasteful extraction needs a binary XOS valuation, got {spec.kind}"
        )
    target = query(mask) if value is None else value
    x = mask
    rest = mask
    while rest:
        bit = 1 << (rest.bit_length() - 1)
        rest ^= bit
        # one pass, highest index first: binary marginals leave every kept good critical
        if query(x ^ bit) == target:
            x ^= bit
    assert spec.value(x) == x.bit_count() == target, "extraction broke v(X) = |X| = v(S)"
    return x


def extract_nonwasteful(valuation: Valuation, goods: Iterable[int] | int) -> frozenset[int]:
    """Return ``X`` inside ``goods`` with ``v(X) = |X| = v(goods)``.

    Goods are tried from the highest index down and dropped whenever dropping
    them keeps the value, so low indices survive ties.  Deterministic, and at
    most ``|S| + 1`` queries.
    """
    return from_mask(extract_nonwasteful_mask(valuation, to_mask(goods)))


def shrink_mask(valuation: Valuation, mask: int, target: int, check: bool = True) -> int:
    spec, query = _query_fn(valuation)
    size = mask.bit_count()
    if not 0 <= target <= size:
        raise ValueError(f"target {target} outside [0, {size}]")
    if check and query(mask) != size:
        raise ValueError("set is not non-wasteful")
    while mask.bit_count() > target:
        mask ^= 1 << (mask.bit_length() - 1)
    return mask


def shrink_to_size(valuation: Valuation, goods: Iterable[int] | int, target: int) -> frozenset[int]:
    """Drop the highest-index goods of a non-wasteful set until ``target`` remain."""
    return from_mask(shrink_mask(valuation, to_mask(goods), target))


def value_table(spec: ValuationSpec, m: int) -> np.ndarray:
    """``v`` on every subset of ``[m]``, indexed by bitmask."""
    if m > 30:
        raise ExhaustiveLimitError(f"m={m} too large for a value table")
    return spec.values(np.arange(1 << m, dtype=_U64))


def _limit(m: int, limit: int, what: str) -> None:
    if m > limit:
        raise ExhaustiveLimitError(f"{what} check is exhaustive; m={m} exceeds limit {limit}")


def _binary_marginals(table: np.ndarray, m: int) -> bool:
    idx = np.arange(1 << m, dtype=np.int64)
    for g in range(m):
        bit = 1 << g
        without = idx[(idx & bit) == 0]
        diff = table[without | bit] - table[without]
        if not np.all((diff == 0) | (diff == 1)):
            return False
    return True


def check_binary_marginals(spec: ValuationSpec, m: int, limit: int = MARGINALS_LIMIT) -> bool:
    """Exhaustively test ``v(S + g) - v(S) in {0, 1}`` for all ``S`` and ``g`` not in ``S``."""
    _limit(m, limit, "binary-marginals")
    return _binary_marginals(value_table(spec, m), m)


def check_subadditive(spec: ValuationSpec, m: int, limit: int = SUBADDITIVE_LIMIT) -> bool:
    """Exhaustively test ``v(S | T) <= v(S) + v(T)`` over all pairs of subsets."""
    _limit(m, limit, "subadditivity")
    table = value_table(spec, m)
    idx = np.arange(1 << m, dtype=np.int64)
    for s in idx:
        if np.any(table[s | idx] > table[s] + table):
            return False
    return True


def check_xos_p2(spec: ValuationSpec, m: int, limit: int = P2_LIMIT) -> bool:
    """Binary marginals plus a non-wasteful witness of full value inside every subset."""
    _limit(m, limit, "P2")
    table = value_table(spec, m)
    if not _binary_marginals(table, m):
        return False
    idx = np.arange(1 << m, dtype=np.int64)
    sizes = _popcount(idx.astype(_U64))
    # best[S] = largest non-wasteful subset of S (max-subset zeta transform)
    best = np.where(table == sizes, sizes, -1)
    for g in range(m):
        bit = 1 << g
        sel = idx[(idx & bit) != 0]
        best[sel] = np.maximum(best[sel], best[sel ^ bit])
    return bool(np.all(best >= table))


def is_monotone(spec: ValuationSpec, m: int, limit: int = MARGINALS_LIMIT) -> bool:
    _limit(m, limit, "monotonicity")
    table = value_table(spec, m)
    idx = np.arange(1 << m, dtype=np.int64)
    for g in range(m):
        without = idx[(idx & (1 << g)) == 0]
        if np.any(table[without | (1 << g)] < table[without]):
            return False
    return True


__all__ = [
    "CountingOracle",
    "ExhaustiveLimitError",
    "PlantedSubadditive",
    "Spectrum",
    "SubadditivePQ",
    "UnsupportedValuation",
    "ValuationSpec",
    "XOSFamily",
    "check_binary_marginals",
    "check_subadditive",
    "check_xos_p2",
    "evaluate",
    "extract_nonwasteful",
    "full_mask",
    "query_count",
    "shrink_to_size",
    "spec_from_json",
    "value_table",
]
