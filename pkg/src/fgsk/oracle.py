"""Brute-force answers by linear scan over the raw object list.

Nothing here touches the index, so these results are independent of any
IR-tree bug.  Rankings are by ``(cost, object id)``.
"""

from __future__ import annotations

import itertools
import math
from typing import Mapping, Optional, Sequence

from .engine import QuerySpec, ResultEntry, Variant
from .model import (Aggregate, CostParams, SpatioTextualObject, SubgroupSelection, aggregate,
                    best_subgroup, object_costs)


def dataset_params(objects: Sequence[SpatioTextualObject], alpha: float = 0.5,
                   aggregate: "Aggregate | str" = Aggregate.SUM, exact_dmax: bool = False,
                   weights: Optional[Mapping[str, float]] = None) -> CostParams:
    """Normalisation constants by the same rule the index builder records."""
    weights = dict(weights or {})
    xs = [o.location[0] for o in objects]
    ys = [o.location[1] for o in objects]
    if exact_dmax:
        d2 = 0.0
        for a, b in itertools.combinations(objects, 2):
            dx, dy = a.location[0] - b.location[0], a.location[1] - b.location[1]
            d2 = max(d2, dx * dx + dy * dy)
        d_max = math.sqrt(d2)
    else:
        d_max = math.sqrt((max(xs) - min(xs)) ** 2 + (max(ys) - min(ys)) ** 2)
    vocab = set().union(*(o.keywords for o in objects))
    w = list(weights.values()) + [weights.get(t, 1.0) for t in vocab]
    return CostParams(alpha=alpha, aggregate=aggregate, d_max=d_max if d_max > 0 else 1.0,
                      w_max=max(w) if w else 1.0, weights=weights)


def exhaustive_subgroup(costs: Sequence[float], m: int, kind) -> SubgroupSelection:
    """Best size-``m`` subgroup by trying all C(n, m) subsets."""
    best = None
    for subset in itertools.combinations(range(len(costs)), m):
        value = aggregate([costs[j] for j in subset], kind)
        if best is None or value < best.aggregate_cost:
            best = SubgroupSelection(subset, value)
    return best


def _cost_rows(objects, spec: QuerySpec) -> list:
    if not objects:
        raise ValueError("the oracle needs at least one object")
    return [(o.id, object_costs(spec.group, o, spec.params)) for o in objects]


def _ranked(rows, size: int, kind, k: int, exhaustive: bool) -> list:
    scored = []
    for oid, costs in rows:
        sel = exhaustive_subgroup(costs, size, kind) if exhaustive else best_subgroup(costs, size, kind)
        scored.append((sel.aggregate_cost, oid, sel.member_indices))
    scored.sort(key=lambda t: (t[0], t[1]))
    return [ResultEntry(oid, cost, subgroup, size) for cost, oid, subgroup in scored[:k]]


def scan_gnnk(objects, spec: QuerySpec) -> list:
    """Top-k ``(object_id, cost)`` for the whole group."""
    kind = spec.params.aggregate
    scored = sorted(((aggregate(costs, kind), oid) for oid, costs in _cost_rows(objects, spec)))
    return [(oid, cost) for cost, oid in scored[:spec.k]]


def scan_fsnnk(objects, spec: QuerySpec, m: Optional[int] = None, exhaustive: bool = False) -> list:
    """Top-k entries for subgroup size ``m`` (default ``spec.m``)."""
    size = spec.m if m is None else m
    return _ranked(_cost_rows(objects, spec), size, spec.params.aggregate, spec.k, exhaustive)


def scan_mfsnnk(objects, spec: QuerySpec, exhaustive: bool = False) -> dict:
    """Per-size top-k entries for every size in ``[m, n]``."""
    rows = _cost_rows(objects, spec)
    n = len(spec.group)
    return {size: _ranked(rows, size, spec.params.aggregate, spec.k, exhaustive)
            for size in range(spec.m, n + 1)}


def expected_entries(objects, spec: QuerySpec) -> list:
    """What any algorithm answering ``spec`` must return, in result order."""
    rows = _cost_rows(objects, spec)
    kind = spec.params.aggregate
    sizes = range(spec.m, len(spec.group) + 1) if spec.variant is Variant.MFSNNK else (spec.m,)
    out = []
    for size in sizes:
        out.extend(_ranked(rows, size, kind, spec.k, False))
    return out
