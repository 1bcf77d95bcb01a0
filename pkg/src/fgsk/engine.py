"""Group spatial keyword queries over an IR-tree.

Six algorithms: branch-and-bound (stack, storage order) and best-first
(min-heap) for the whole-group and fixed-subgroup-size queries, plus the
repeated and single-pass best-first algorithms for a range of subgroup
sizes.  All of them return, per subgroup size, the ``k`` objects with the
lowest aggregate cost, ties broken by ascending object id.
"""

from __future__ import annotations

import enum
import heapq
import math
import time
from dataclasses import dataclass
from typing import Optional


from .costs import GroupEvaluator, subgroup_bounds
from .model import CostParams, InputError, QueryGroup, best_subgroup
from .storage import AccessCounters

INF = math.inf


class Variant(str, enum.Enum):
    GNNK = "gnnk"
    FSNNK = "fsnnk"
    MFSNNK = "mfsnnk"


class Algorithm(str, enum.Enum):
    BB = "bb"
    BF = "bf"
    N = "n"


ALGORITHMS = ("gnnk-bb", "gnnk-bf", "fsnnk-bb", "fsnnk-bf", "mfsnnk-n", "mfsnnk-bf")


@dataclass(frozen=True)
class QuerySpec:
    group: QueryGroup
    params: CostParams
    variant: Variant = Variant.GNNK
    algorithm: Algorithm = Algorithm.BF
    k: int = 1
    m: Optional[int] = None  # subgroup size, or minimum size for MFSNNK
    relaxed_prune: bool = False

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        n = len(self.group)
        if self.k < 1:
            raise InputError(f"k must be at least 1, got {self.k}")
        if self.variant is Variant.GNNK:
            if self.m not in (None, n):
                raise InputError("a whole-group query takes no subgroup size")
            object.__setattr__(self, "m", n)
        elif self.m is None or not 1 <= self.m <= n:
            raise InputError(f"subgroup size m={self.m} must lie in [1, {n}]")
        if self.algorithm is Algorithm.N and self.variant is not Variant.MFSNNK:
            raise InputError("the repeated algorithm only answers multi-size queries")
        if self.variant is Variant.MFSNNK and self.algorithm is Algorithm.BB:
            raise InputError("multi-size queries run with the 'bf' or 'n' algorithm")
        if self.relaxed_prune and (self.variant, self.algorithm) != (Variant.MFSNNK, Algorithm.BF):
            raise InputError("relaxed pruning applies to mfsnnk-bf only")

    @classmethod
    def from_name(cls, name: str, group: QueryGroup, params: CostParams, **kw) -> "QuerySpec":
        try:
            variant, algorithm = name.lower().split("-")
            return cls(group, params, Variant(variant), Algorithm(algorithm), **kw)
        except ValueError as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}") from None

    @property
    def name(self) -> str:
        return f"{self.variant.value}-{self.algorithm.value}"

    @property
    def sizes(self) -> range:
        n = len(self.group)
        if self.variant is Variant.MFSNNK:
            return range(self.m, n + 1)
        return range(self.m, self.m + 1)


@dataclass(frozen=True)
class ResultEntry:
    object_id: int
    cost: float
    subgroup: tuple  # ascending member indices
    size: int


@dataclass
class QueryResult:
    algorithm: str
    entries: list
    counters: AccessCounters
    elapsed: float = 0.0  # seconds

    def by_size(self) -> dict:
        out: dict = {}
        for e in self.entries:
            out.setdefault(e.size, []).append(e)
        return out

    def to_dict(self, with_elapsed: bool = True) -> dict:
        d = {
            "algorithm": self.algorithm,
            "results": [{"size": size, "entries": [
                {"object_id": e.object_id, "cost": e.cost, "subgroup_indices": list(e.subgroup)}
                for e in entries]} for size, entries in sorted(self.by_size().items())],
            "counters": self.counters.as_dict(),
        }
        if with_elapsed:
            d["elapsed_ms"] = self.elapsed * 1000.0
        return d


class TopK:
    """The k best ``(cost, object_id)`` pairs seen so far."""

    def __init__(self, k: int):
        self.k = k
        self._heap: list = []  # (-cost, -id, id, member costs)

    def bound(self) -> float:
        return -self._heap[0][0] if len(self._heap) == self.k else INF

    def offer(self, cost: float, oid: int, column) -> None:
        item = (-cost, -oid, oid, column)
        if len(self._heap) < self.k:
            heapq.heappush(self._heap, item)
        elif (cost, oid) < (-self._heap[0][0], self._heap[0][2]):
            heapq.heapreplace(self._heap, item)

    def items(self) -> list:
        return sorted(((-c, oid, col) for c, _, oid, col in self._heap), key=lambda t: (t[0], t[1]))


def _entries(found, size, kind) -> list:
    out = []
    for cost, oid, column in found:
        sel = best_subgroup(column.tolist(), size, kind)
        out.append(ResultEntry(int(oid), float(cost), sel.member_indices, size))
    return out


def _single_size_bb(tree, spec: QuerySpec, size: int, prune: bool = True) -> tuple:
    ev = GroupEvaluator(spec.group, spec.params, tree.keyword_ids)
    kind = spec.params.aggregate
    counters = AccessCounters(nodes_enqueued=1)
    top = TopK(spec.k)
    stack = [(0.0, tree.root_page)]
    while stack:
        bound, page = stack.pop()
        # the stored bound may have gone stale since the push
        if prune and bound > top.bound():
            counters.nodes_pruned += 1
            continue
        node = tree.read_node(page, counters)
        if node.is_leaf:
            inv = tree.read_postings(node, counters)
            costs = ev.object_costs(node, inv.postings)
            aggs = subgroup_bounds(costs, (size,), kind)[0].tolist()
            counters.objects_scored += len(aggs)
            for j, oid in enumerate(node.objects["id"].tolist()):
                if aggs[j] <= top.bound():
                    top.offer(aggs[j], oid, costs[:, j])
        else:
            aggs = subgroup_bounds(ev.node_costs(node), (size,), kind)[0].tolist()
            for a, child in zip(aggs, node.child_pages):
                if prune and a > top.bound():
                    counters.nodes_pruned += 1
                else:
                    stack.append((a, child))
                    counters.nodes_enqueued += 1
    return _entries(top.items(), size, kind), counters


def _single_size_bf(tree, spec: QuerySpec, size: int, trace: Optional[list] = None) -> tuple:
    ev = GroupEvaluator(spec.group, spec.params, tree.keyword_ids)
    kind = spec.params.aggregate
    counters = AccessCounters(nodes_enqueued=1)
    # (key, 0 = node | 1 = object, page or object id, member costs); nodes
    # precede objects of equal key so an equal-cost object with a smaller
    # id can still surface
    heap = [(0.0, 0, tree.root_page, None)]
    found = []
    while heap and len(found) < spec.k:
        key, is_obj, ident, column = heapq.heappop(heap)
        if trace is not None:
            trace.append((key, bool(is_obj), ident))
        if is_obj:
            found.append((key, ident, column))
            continue
        node = tree.read_node(ident, counters)
        if node.is_leaf:
            inv = tree.read_postings(node, counters)
            costs = ev.object_costs(node, inv.postings)
            aggs = subgroup_bounds(costs, (size,), kind)[0].tolist()
            counters.objects_scored += len(aggs)
            for j, oid in enumerate(node.objects["id"].tolist()):
                heapq.heappush(heap, (aggs[j], 1, oid, costs[:, j]))
        else:
            aggs = subgroup_bounds(ev.node_costs(node), (size,), kind)[0].tolist()
            for a, child in zip(aggs, node.child_pages):
                heapq.heappush(heap, (a, 0, child, None))
                counters.nodes_enqueued += 1
    counters.nodes_pruned += sum(1 for item in heap if not item[1])
    return _entries(found, size, kind), counters


def _timed(name, fn) -> QueryResult:
    start = time.perf_counter()
    entries, counters = fn()
    return QueryResult(name, entries, counters, time.perf_counter() - start)


def _check(spec: QuerySpec, variant: Variant, algorithm: Algorithm) -> None:
    if (spec.variant, spec.algorithm) != (variant, algorithm):
        raise InputError(f"spec is for {spec.name}, not {variant.value}-{algorithm.value}")


def gnnk_bb(tree, spec: QuerySpec, prune: bool = True) -> QueryResult:
    _check(spec, Variant.GNNK, Algorithm.BB)
    return _timed(spec.name, lambda: _single_size_bb(tree, spec, len(spec.group), prune))


def gnnk_bf(tree, spec: QuerySpec, trace: Optional[list] = None) -> QueryResult:
    _check(spec, Variant.GNNK, Algorithm.BF)
    return _timed(spec.name, lambda: _single_size_bf(tree, spec, len(spec.group), trace))


def fsnnk_bb(tree, spec: QuerySpec, prune: bool = True) -> QueryResult:
    _check(spec, Variant.FSNNK, Algorithm.BB)
    return _timed(spec.name, lambda: _single_size_bb(tree, spec, spec.m, prune))


def fsnnk_bf(tree, spec: QuerySpec, trace: Optional[list] = None) -> QueryResult:
    _check(spec, Variant.FSNNK, Algorithm.BF)
    return _timed(spec.name, lambda: _single_size_bf(tree, spec, spec.m, trace))


def mfsnnk_n(tree, spec: QuerySpec) -> QueryResult:
    """One best-first pass per subgroup size; counters add up across passes."""
    _check(spec, Variant.MFSNNK, Algorithm.N)

    def run():
        entries, total = [], AccessCounters()
        for size in spec.sizes:
            part, counters = _single_size_bf(tree, spec, size)
            entries.extend(part)
            total += counters
        return entries, total

    return _timed(spec.name, run)


def _mfsnnk_bf(tree, spec: QuerySpec, prune: bool) -> tuple:
    ev = GroupEvaluator(spec.group, spec.params, tree.keyword_ids)
    kind = spec.params.aggregate
    sizes = tuple(spec.sizes)
    relaxed = spec.relaxed_prune
    tops = [TopK(spec.k) for _ in sizes]
    whole = tops[-1]
    counters = AccessCounters(nodes_enqueued=1)

    def admits(query_costs) -> bool:
        if not prune:
            return True
        if relaxed:
            return query_costs[0] <= whole.bound()
        return any(c <= t.bound() for c, t in zip(query_costs, tops))

    heap = [(0.0, tree.root_page, [0.0] * (1 if relaxed else len(sizes)))]
    while heap:
        _, page, query_costs = heapq.heappop(heap)
        if not admits(query_costs):
            counters.nodes_pruned += 1
            continue
        node = tree.read_node(page, counters)
        if node.is_leaf:
            inv = tree.read_postings(node, counters)
            costs = ev.object_costs(node, inv.postings)
            aggs = subgroup_bounds(costs, sizes, kind).tolist()
            ids = node.objects["id"].tolist()
            counters.objects_scored += len(ids)
            for i, top in enumerate(tops):
                row = aggs[i]
                for j, oid in enumerate(ids):
                    if row[j] <= top.bound():
                        top.offer(row[j], oid, costs[:, j])
            continue
        if relaxed:
            bounds = subgroup_bounds(ev.node_costs(node), sizes[:1], kind).tolist()
            for child, b in zip(node.child_pages, bounds[0]):
                if admits([b]):
                    heapq.heappush(heap, (b, child, [b]))
                    counters.nodes_enqueued += 1
                else:
                    counters.nodes_pruned += 1
        else:
            bounds = subgroup_bounds(ev.node_costs(node), sizes, kind).T.tolist()
            for child, col in zip(node.child_pages, bounds):
                if admits(col):
                    total = 0.0
                    for v in col:
                        total += v
                    heapq.heappush(heap, (total, child, col))
                    counters.nodes_enqueued += 1
                else:
                    counters.nodes_pruned += 1
    entries = []
    for size, top in zip(sizes, tops):
        entries.extend(_entries(top.items(), size, kind))
    return entries, counters


def mfsnnk_bf(tree, spec: QuerySpec, prune: bool = True) -> QueryResult:
    """Single best-first pass answering every subgroup size in ``[m, n]``."""
    _check(spec, Variant.MFSNNK, Algorithm.BF)
    return _timed(spec.name, lambda: _mfsnnk_bf(tree, spec, prune))


_DISPATCH = {
    (Variant.GNNK, Algorithm.BB): gnnk_bb,
    (Variant.GNNK, Algorithm.BF): gnnk_bf,
    (Variant.FSNNK, Algorithm.BB): fsnnk_bb,
    (Variant.FSNNK, Algorithm.BF): fsnnk_bf,
    (Variant.MFSNNK, Algorithm.N): mfsnnk_n,
    (Variant.MFSNNK, Algorithm.BF): mfsnnk_bf,
}


def run_query(tree, spec: QuerySpec, **kw) -> QueryResult:
    return _DISPATCH[(spec.variant, spec.algorithm)](tree, spec, **kw)
