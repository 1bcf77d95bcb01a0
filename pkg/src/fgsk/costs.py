"""Per-node cost matrices for a whole query group.

``GroupEvaluator`` reproduces :func:`fgsk.model.cost_node` and
:func:`fgsk.model.cost_object` exactly (same operations, same order), but
evaluates all members against all entries of a node at once.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from .model import Aggregate, CostParams, QueryGroup


class GroupEvaluator:
    def __init__(self, group: QueryGroup, params: CostParams, keyword_ids: Mapping[str, int]):
        self.group = group
        self.params = params
        self.n = len(group)
        self.alpha = params.alpha
        self.beta = 1.0 - params.alpha
        self.d_max = params.d_max
        self.qx = np.array([[q.location[0]] for q in group], dtype=np.float64)
        self.qy = np.array([[q.location[1]] for q in group], dtype=np.float64)
        self.prio = np.array([[q.priority] for q in group], dtype=np.float64)
        self.qlen = np.array([[float(len(q.keywords))] for q in group], dtype=np.float64)

        known = sorted({keyword_ids[t] for q in group for t in q.keywords if t in keyword_ids})
        self.union = np.array(known, dtype=np.int64)
        col = {kid: i for i, kid in enumerate(known)}
        # rank r holds, for each member, the column and term of its r-th
        # matching-capable keyword in sorted token order; padding uses a
        # column that is always False
        terms = [[(col[keyword_ids[t]], params.term(t)) for t in sorted(q.keywords) if t in keyword_ids]
                 for q in group]
        self.pad = len(known)
        depth = max((len(t) for t in terms), default=0)
        self.rank_cols = np.full((depth, self.n), self.pad, dtype=np.int64)
        self.rank_terms = np.zeros((depth, self.n, 1), dtype=np.float64)
        for j, tl in enumerate(terms):
            for r, (c, w) in enumerate(tl):
                self.rank_cols[r, j] = c
                self.rank_terms[r, j, 0] = w

    def _membership(self, count: int) -> np.ndarray:
        return np.zeros((count, self.pad + 1), dtype=bool)

    def _blend(self, xmin, ymin, xmax, ymax, member) -> np.ndarray:
        dx = np.maximum(np.maximum(xmin[None, :] - self.qx, self.qx - xmax[None, :]), 0.0)
        dy = np.maximum(np.maximum(ymin[None, :] - self.qy, self.qy - ymax[None, :]), 0.0)
        dist = np.minimum(1.0, np.sqrt(dx * dx + dy * dy) / self.d_max)
        acc = np.zeros((self.n, member.shape[0]), dtype=np.float64)
        mt = member.T
        for r in range(len(self.rank_cols)):
            acc = acc + np.where(mt[self.rank_cols[r]], self.rank_terms[r], 0.0)
        sim = acc / self.qlen
        return (self.alpha * dist + self.beta * (1.0 - sim)) / self.prio

    def rect_costs(self, mbrs: np.ndarray, summary_ids: np.ndarray, offsets: np.ndarray) -> np.ndarray:
        """Costs of every member against every child rectangle: shape (n, C)."""
        count = len(mbrs)
        member = self._membership(count)
        if len(self.union) and len(summary_ids):
            ids = summary_ids.astype(np.int64)
            pos = np.searchsorted(self.union, ids)
            clipped = np.minimum(pos, len(self.union) - 1)
            hit = self.union[clipped] == ids
            owner = np.repeat(np.arange(count), np.diff(offsets))
            member[owner[hit], clipped[hit]] = True
        return self._blend(mbrs[:, 0], mbrs[:, 1], mbrs[:, 2], mbrs[:, 3], member)

    def node_costs(self, node) -> np.ndarray:
        return self.rect_costs(node.child_mbrs, node.child_summary_ids, node.child_summary_offsets)

    def object_costs(self, node, postings: Mapping[int, np.ndarray]) -> np.ndarray:
        """Costs of every member against every object of a leaf: shape (n, C)."""
        objs = node.objects
        member = self._membership(len(objs))
        if len(self.union):
            where = {oid: i for i, oid in enumerate(objs["id"].tolist())}
            for c, kid in enumerate(self.union.tolist()):
                plist = postings.get(kid)
                if plist is not None:
                    member[[where[o] for o in plist.tolist()], c] = True
        x, y = objs["x"].astype(np.float64), objs["y"].astype(np.float64)
        return self._blend(x, y, x, y, member)


def subgroup_bounds(costs: np.ndarray, sizes, kind: Aggregate) -> np.ndarray:
    """Aggregate of the ``i`` cheapest members for each ``i`` in ``sizes``.

    ``costs`` has shape (n, C); the result has shape (len(sizes), C).
    Matches :func:`fgsk.model.best_subgroup` exactly.
    """
    ordered = np.sort(costs, axis=0)
    idx = np.asarray(sizes, dtype=np.int64) - 1
    if kind is Aggregate.SUM:
        return np.cumsum(ordered, axis=0)[idx]
    if kind is Aggregate.MAX:
        return ordered[idx]
    return np.broadcast_to(ordered[0], (len(idx), costs.shape[1]))
