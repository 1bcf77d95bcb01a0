"""Domain types and the blended spatial/textual cost model.

Every cost here is built from the same few float operations in the same
order, so that a node bound is never larger than the cost of anything
stored beneath it, not even by one ulp.  The vectorised evaluator in
:mod:`fgsk.costs` mirrors these functions bit for bit.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence, Tuple

Point = Tuple[float, float]
Rect = Tuple[float, float, float, float]  # (xmin, ymin, xmax, ymax)


class InputError(ValueError):
    """Raised for malformed query, object or parameter input."""


class Aggregate(str, enum.Enum):
    SUM = "sum"
    MAX = "max"
    MIN = "min"

    @classmethod
    def parse(cls, value: "str | Aggregate") -> "Aggregate":
        if isinstance(value, Aggregate):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InputError(f"unknown aggregate {value!r}") from None


def _keyword_set(keywords: Iterable[str]) -> frozenset:
    kws = frozenset(keywords)
    for kw in kws:
        if not isinstance(kw, str) or not kw:
            raise InputError(f"keywords must be non-empty strings, got {kw!r}")
    return kws


def _location(loc) -> Point:
    x, y = float(loc[0]), float(loc[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise InputError(f"location must be finite, got {loc!r}")
    return x, y


@dataclass(frozen=True)
class SpatioTextualObject:
    id: int
    location: Point
    keywords: frozenset

    def __post_init__(self):
        if self.id < 0:
            raise InputError(f"object id must be unsigned, got {self.id}")
        object.__setattr__(self, "location", _location(self.location))
        object.__setattr__(self, "keywords", _keyword_set(self.keywords))


@dataclass(frozen=True)
class QueryPoint:
    location: Point
    keywords: frozenset
    priority: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "location", _location(self.location))
        kws = _keyword_set(self.keywords)
        if not kws:
            raise InputError("a query point needs at least one keyword")
        object.__setattr__(self, "keywords", kws)
        if not self.priority > 0:
            raise InputError(f"priority must be positive, got {self.priority}")
        object.__setattr__(self, "priority", float(self.priority))


@dataclass(frozen=True)
class QueryGroup:
    members: Tuple[QueryPoint, ...]

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise InputError("a query group needs at least one member")
        object.__setattr__(self, "members", members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[QueryPoint]:
        return iter(self.members)

    def __getitem__(self, i: int) -> QueryPoint:
        return self.members[i]

    def scaled(self, factor: float) -> "QueryGroup":
        """Copy of the group with every priority multiplied by ``factor``."""
        return QueryGroup(tuple(QueryPoint(q.location, q.keywords, q.priority * factor) for q in self.members))


@dataclass(frozen=True)
class CostParams:
    alpha: float = 0.5
    aggregate: Aggregate = Aggregate.SUM
    d_max: float = 1.0
    w_max: float = 1.0
    weights: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "aggregate", Aggregate.parse(self.aggregate))
        if not 0.0 <= self.alpha <= 1.0:
            raise InputError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.d_max > 0:
            raise InputError(f"d_max must be positive, got {self.d_max}")
        if not self.w_max > 0:
            raise InputError(f"w_max must be positive, got {self.w_max}")
        for kw, w in self.weights.items():
            if not w > 0:
                raise InputError(f"weight of {kw!r} must be positive, got {w}")
            if w > self.w_max:
                raise InputError(f"weight of {kw!r} ({w}) exceeds w_max ({self.w_max})")

    def weight(self, keyword: str) -> float:
        return self.weights.get(keyword, 1.0)

    def term(self, keyword: str) -> float:
        """Normalised weight contributed by a shared keyword."""
        return self.weight(keyword) / self.w_max

    def with_(self, **changes) -> "CostParams":
        values = dict(alpha=self.alpha, aggregate=self.aggregate, d_max=self.d_max,
                      w_max=self.w_max, weights=self.weights)
        values.update(changes)
        return CostParams(**values)


@dataclass(frozen=True)
class SubgroupSelection:
    member_indices: Tuple[int, ...]  # ascending
    aggregate_cost: float

    @property
    def size(self) -> int:
        return len(self.member_indices)


def check_rect(rect: Rect) -> Rect:
    xmin, ymin, xmax, ymax = rect
    if not (xmin <= xmax and ymin <= ymax):
        raise InputError(f"malformed rectangle {rect!r}")
    return rect


def min_dist(point: Point, rect: Rect) -> float:
    """Euclidean distance from ``point`` to the nearest point of ``rect``."""
    xmin, ymin, xmax, ymax = check_rect(rect)
    x, y = point
    dx = max(xmin - x, x - xmax, 0.0)
    dy = max(ymin - y, y - ymax, 0.0)
    return math.sqrt(dx * dx + dy * dy)


def normalized_distance(a: Point, b: Point, d_max: float) -> float:
    # written as a degenerate-rectangle distance so it agrees exactly with min_dist
    dx = max(b[0] - a[0], a[0] - b[0], 0.0)
    dy = max(b[1] - a[1], a[1] - b[1], 0.0)
    return min(1.0, math.sqrt(dx * dx + dy * dy) / d_max)


def keyword_similarity(query_keywords: Iterable[str], target_keywords, params: CostParams) -> float:
    query = sorted(query_keywords)
    if not query:
        raise InputError("query keyword set is empty")
    total = 0.0
    for kw in query:
        if kw in target_keywords:
            total += params.term(kw)
    return total / len(query)


def _blend(alpha: float, dist: float, sim: float, priority: float) -> float:
    return (alpha * dist + (1.0 - alpha) * (1.0 - sim)) / priority


def cost_object(q: QueryPoint, o: SpatioTextualObject, params: CostParams) -> float:
    dist = normalized_distance(q.location, o.location, params.d_max)
    sim = keyword_similarity(q.keywords, o.keywords, params)
    return _blend(params.alpha, dist, sim, q.priority)


def cost_node(q: QueryPoint, mbr: Rect, node_keywords, params: CostParams) -> float:
    dist = min(1.0, min_dist(q.location, mbr) / params.d_max)
    sim = keyword_similarity(q.keywords, node_keywords, params)
    return _blend(params.alpha, dist, sim, q.priority)


def object_costs(group: QueryGroup, o: SpatioTextualObject, params: CostParams) -> list:
    return [cost_object(q, o, params) for q in group]


def node_costs(group: QueryGroup, mbr: Rect, node_keywords, params: CostParams) -> list:
    return [cost_node(q, mbr, node_keywords, params) for q in group]


def aggregate(costs: Sequence[float], kind: "Aggregate | str") -> float:
    """Fold per-member costs.

    SUM adds in ascending order; that makes the fold monotone in every
    argument under rounding and independent of member order.
    """
    kind = Aggregate.parse(kind)
    if len(costs) == 0:
        raise InputError("cannot aggregate an empty cost vector")
    if kind is Aggregate.MAX:
        return max(costs)
    if kind is Aggregate.MIN:
        return min(costs)
    total = 0.0
    for c in sorted(costs):
        total += c
    return total


def best_subgroup(costs: Sequence[float], m: int, kind: "Aggregate | str") -> SubgroupSelection:
    """The ``m`` cheapest members (ties to the lower index) and their aggregate."""
    n = len(costs)
    if not 1 <= m <= n:
        raise InputError(f"subgroup size {m} outside [1, {n}]")
    order = sorted(range(n), key=lambda j: (costs[j], j))[:m]
    return SubgroupSelection(tuple(sorted(order)), aggregate([costs[j] for j in order], kind))
