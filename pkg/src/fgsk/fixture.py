"""The seven-restaurant, five-friend running example as pinned data.

Keyword sets are the published ones.  Coordinates were chosen so that the
objects span a 6 x 8 box (hence ``d_max`` = 10 under the bounding-box
rule), the member distances to ``o6`` are 3.5, 5.5, 6.5, 1 and 9.5, and
the costs of ``o7`` reproduce its published aggregates (0.8, 1.125 and
1.625 for subgroup sizes 3, 4 and 5).  With fanout 2, ``o6`` and ``o7``
share a leaf whose keyword summary is {t1, t3, t4, t6}.
"""

from __future__ import annotations

from .model import QueryGroup, QueryPoint, SpatioTextualObject

D_MAX = 10.0
ALPHA = 0.5
FANOUT = 2

_OBJECTS = (
    (1, (2.7, 1.8), "t1 t2 t7"),
    (2, (6.0, 8.0), "t2 t5"),
    (3, (0.0, 0.0), "t2 t7"),
    (4, (2.2, 1.9), "t1 t2 t3"),
    (5, (2.5, 0.7), "t5 t6"),
    (6, (2.1, 7.3), "t1 t3 t4"),
    (7, (1.9079124072074478, 3.6444881863474112), "t1 t3 t4 t6"),
)

_QUERIES = (
    ((2.107041024437891, 3.8000070822964704), "t1 t2"),
    ((7.579070839504601, 6.820643414887879), "t4"),
    ((7.9421613009445835, 4.450587545870994), "t3 t6"),
    ((2.2045284632676534, 8.294521895368273), "t1"),
    ((-7.4, 7.3), "t4 t6"),
)

# distances from each member to o6, and the resulting member costs
O6_DISTANCES = (3.5, 5.5, 6.5, 1.0, 9.5)
O6_COSTS = (0.425, 0.275, 0.575, 0.05, 0.725)
# aggregate SUM costs per subgroup size 3, 4, 5
O6_AGGREGATES = {3: 0.75, 4: 1.325, 5: 2.05}
O7_AGGREGATES = {3: 0.8, 4: 1.125, 5: 1.625}


def objects() -> list:
    return [SpatioTextualObject(i, loc, frozenset(kw.split())) for i, loc, kw in _OBJECTS]


def query_group() -> QueryGroup:
    return QueryGroup(tuple(QueryPoint(loc, frozenset(kw.split())) for loc, kw in _QUERIES))
