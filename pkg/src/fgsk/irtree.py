"""Static, disk-paged IR-tree: an STR-packed R-tree whose entries carry the
keyword summary of the subtree below them, with one inverted file per leaf.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .model import (CostParams, InputError, QueryPoint, Rect, SpatioTextualObject,
                    cost_node, cost_object, min_dist)
from .storage import (KIND_INTERIOR, KIND_LEAF, KIND_POSTINGS, KIND_VOCAB, MIN_PAGE_SIZE,
                      PAGE_HEADER, AccessCounters, IndexFormatError, IndexHeader, PageReader,
                      PageWriter)

__all__ = ["build_index", "open_index", "IRTree", "IRTreeNode", "LeafInvertedFile",
           "min_dist", "str_pack", "exact_max_distance", "AuditReport", "audit_index"]

_NODE_HEAD = struct.Struct("<HIQ4dI")  # level, count, postings page, mbr, summary length
_CHILD = struct.Struct("<Q4dI")  # child page, mbr, summary length
_LEAF_ENTRY = np.dtype([("id", "<u8"), ("x", "<f8"), ("y", "<f8")])
_VOCAB_ENTRY = struct.Struct("<dH")

EXACT_DMAX_LIMIT = 10_000


@dataclass
class IRTreeNode:
    page_id: int
    level: int  # 0 for leaves
    mbr: Rect
    keyword_summary: np.ndarray  # sorted keyword ids
    postings_page: int = 0
    # interior nodes
    child_pages: Sequence[int] = ()
    child_mbrs: Optional[np.ndarray] = None  # (C, 4)
    child_summary_ids: Optional[np.ndarray] = None  # concatenated sorted ids
    child_summary_offsets: Optional[np.ndarray] = None  # (C + 1,)
    # leaves
    objects: Optional[np.ndarray] = None  # structured array of _LEAF_ENTRY

    @property
    def is_leaf(self) -> bool:
        return self.level == 0

    def __len__(self) -> int:
        return len(self.objects) if self.is_leaf else len(self.child_pages)

    def child_summary(self, i: int) -> np.ndarray:
        lo, hi = self.child_summary_offsets[i], self.child_summary_offsets[i + 1]
        return self.child_summary_ids[lo:hi]

    @property
    def entries(self) -> list:
        """``(page_id, mbr, summary)`` per child, or ``(object_id, (x, y))`` per object."""
        if self.is_leaf:
            return [(int(r["id"]), (float(r["x"]), float(r["y"]))) for r in self.objects]
        return [(int(p), tuple(float(v) for v in self.child_mbrs[i]), self.child_summary(i))
                for i, p in enumerate(self.child_pages)]


@dataclass
class LeafInvertedFile:
    page_id: int
    postings: dict  # keyword id -> array of object ids


# ---------------------------------------------------------------- building

def str_pack(xs: np.ndarray, ys: np.ndarray, keys: np.ndarray, capacity: int) -> list:
    """Sort-Tile-Recursive grouping of items by their centre coordinates.

    Returns lists of item indices, each at most ``capacity`` long, in
    storage order.  Ties fall back to ``keys`` so the packing is
    deterministic.
    """
    n = len(xs)
    leaves = math.ceil(n / capacity)
    slabs = math.ceil(math.sqrt(leaves))
    slab_len = slabs * capacity
    order = np.lexsort((keys, ys, xs))
    groups = []
    for s in range(0, n, slab_len):
        slab = order[s:s + slab_len]
        slab = slab[np.lexsort((keys[slab], xs[slab], ys[slab]))]
        for g in range(0, len(slab), capacity):
            groups.append(slab[g:g + capacity].tolist())
    return groups


def exact_max_distance(xs: np.ndarray, ys: np.ndarray) -> float:
    """Largest pairwise distance, by brute force over all pairs."""
    n = len(xs)
    if n > EXACT_DMAX_LIMIT:
        raise InputError(f"exact d_max is limited to {EXACT_DMAX_LIMIT} objects, got {n}")
    best = 0.0
    step = 1024
    for i in range(0, n, step):
        dx = xs[i:i + step, None] - xs[None, :]
        dy = ys[i:i + step, None] - ys[None, :]
        best = max(best, float((dx * dx + dy * dy).max()))
    return math.sqrt(best)


def _encode_ids(ids) -> bytes:
    return np.asarray(ids, dtype="<u4").tobytes()


def _encode_interior(level, mbr, summary, children) -> bytes:
    parts = [_NODE_HEAD.pack(level, len(children), 0, *mbr, len(summary)), _encode_ids(summary)]
    for page, cmbr, csum in children:
        parts.append(_CHILD.pack(page, *cmbr, len(csum)))
        parts.append(_encode_ids(csum))
    return b"".join(parts)


def _encode_leaf(mbr, summary, postings_page, rows) -> bytes:
    head = _NODE_HEAD.pack(0, len(rows), postings_page, *mbr, len(summary))
    return head + _encode_ids(summary) + rows.tobytes()


def _encode_postings(postings: Mapping[int, list]) -> bytes:
    parts = [struct.pack("<I", len(postings))]
    for kw in sorted(postings):
        ids = sorted(postings[kw])
        parts.append(struct.pack("<II", kw, len(ids)))
        parts.append(np.asarray(ids, dtype="<u8").tobytes())
    return b"".join(parts)


def _encode_vocab(tokens, weights) -> bytes:
    parts = [struct.pack("<I", len(tokens))]
    for tok, w in zip(tokens, weights):
        raw = tok.encode("utf-8")
        parts.append(_VOCAB_ENTRY.pack(w, len(raw)))
        parts.append(raw)
    return b"".join(parts)


def build_index(objects: Sequence[SpatioTextualObject], path, fanout: int = 50,
                page_size: int = 4096, exact_dmax: bool = False,
                weights: Optional[Mapping[str, float]] = None) -> IndexHeader:
    """Bulk-load ``objects`` into an index file at ``path``."""
    if not objects:
        raise InputError("cannot index an empty dataset")
    if fanout < 2:
        raise InputError(f"fanout must be at least 2, got {fanout}")
    if page_size < MIN_PAGE_SIZE:
        raise InputError(f"page size must be at least {MIN_PAGE_SIZE} bytes, got {page_size}")
    if page_size - PAGE_HEADER.size < max(_NODE_HEAD.size, _CHILD.size, _LEAF_ENTRY.itemsize):
        raise InputError(f"page size {page_size} cannot hold a single entry")
    weights = dict(weights or {})

    ids = np.array([o.id for o in objects], dtype=np.uint64)
    if len(np.unique(ids)) != len(ids):
        seen, dup = set(), None
        for o in objects:
            if o.id in seen:
                dup = o.id
                break
            seen.add(o.id)
        raise InputError(f"duplicate object id {dup}")
    xs = np.array([o.location[0] for o in objects], dtype=np.float64)
    ys = np.array([o.location[1] for o in objects], dtype=np.float64)

    tokens = sorted(set().union(*(o.keywords for o in objects)))
    kw_id = {t: i for i, t in enumerate(tokens)}
    token_weights = [float(weights.get(t, 1.0)) for t in tokens]
    for t, w in weights.items():
        if not w > 0:
            raise InputError(f"weight of {t!r} must be positive")
    w_max = max(list(weights.values()) + [w for w in token_weights]) if (weights or tokens) else 1.0
    kw_lists = [sorted(kw_id[t] for t in o.keywords) for o in objects]

    bbox = (float(xs.min()), float(ys.min()), float(xs.max()), float(ys.max()))
    if exact_dmax:
        d_max = exact_max_distance(xs, ys)
    else:
        d_max = math.sqrt((bbox[2] - bbox[0]) ** 2 + (bbox[3] - bbox[1]) ** 2)
    if d_max <= 0:
        d_max = 1.0  # all objects coincide

    writer = PageWriter(page_size)
    vocab_page, _ = writer.append(KIND_VOCAB, _encode_vocab(tokens, token_weights))
    first_tree_page = len(writer.pages)

    # leaves: (page, mbr, summary) per written node
    level_nodes = []
    for group in str_pack(xs, ys, ids, fanout):
        gx, gy = xs[group], ys[group]
        mbr = (float(gx.min()), float(gy.min()), float(gx.max()), float(gy.max()))
        postings: dict = {}
        for i in group:
            for k in kw_lists[i]:
                postings.setdefault(k, []).append(int(ids[i]))
        summary = sorted(postings)
        rows = np.zeros(len(group), dtype=_LEAF_ENTRY)
        rows["id"], rows["x"], rows["y"] = ids[group], gx, gy
        ppage, _ = writer.append(KIND_POSTINGS, _encode_postings(postings))
        page, _ = writer.append(KIND_LEAF, _encode_leaf(mbr, summary, ppage, rows))
        level_nodes.append((page, mbr, summary))

    level = 0
    node_count = len(level_nodes)
    while len(level_nodes) > 1:
        level += 1
        mbrs = np.array([n[1] for n in level_nodes])
        cx = (mbrs[:, 0] + mbrs[:, 2]) / 2
        cy = (mbrs[:, 1] + mbrs[:, 3]) / 2
        keys = np.array([n[0] for n in level_nodes], dtype=np.int64)
        parents = []
        for group in str_pack(cx, cy, keys, fanout):
            children = [level_nodes[i] for i in group]
            mbr = (min(c[1][0] for c in children), min(c[1][1] for c in children),
                   max(c[1][2] for c in children), max(c[1][3] for c in children))
            summary = sorted(set().union(*(c[2] for c in children)))
            page, _ = writer.append(KIND_INTERIOR, _encode_interior(level, mbr, summary, children))
            parents.append((page, mbr, summary))
        node_count += len(parents)
        level_nodes = parents

    header = IndexHeader(page_size=page_size, fanout=fanout, height=level + 1,
                         object_count=len(objects), root_page=level_nodes[0][0],
                         page_count=len(writer.pages),
                         tree_page_count=len(writer.pages) - first_tree_page,
                         node_count=node_count, vocab_page=vocab_page,
                         vocab_count=len(tokens), d_max=float(d_max), w_max=float(w_max),
                         bbox=bbox, exact_dmax=bool(exact_dmax))
    writer.write(path, header)
    return header


# ----------------------------------------------------------------- reading

class IRTree:
    """Read-only handle on an index file.  Nodes are decoded on every read."""

    def __init__(self, path):
        self._reader = PageReader(path)
        self.header: IndexHeader = self._reader.header
        kind, payload, _ = self._reader.read_record(self.header.vocab_page)
        if kind != KIND_VOCAB:
            raise IndexFormatError("vocabulary page has wrong kind")
        (count,) = struct.unpack_from("<I", payload)
        off = 4
        tokens, weights = [], []
        for _ in range(count):
            w, ln = _VOCAB_ENTRY.unpack_from(payload, off)
            off += _VOCAB_ENTRY.size
            tokens.append(payload[off:off + ln].decode("utf-8"))
            weights.append(w)
            off += ln
        if count != self.header.vocab_count:
            raise IndexFormatError("vocabulary size does not match header")
        self.vocabulary: list = tokens
        self.keyword_ids: dict = {t: i for i, t in enumerate(tokens)}
        self.weights: dict = dict(zip(tokens, weights))

    # context manager / lifetime
    def close(self) -> None:
        self._reader.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    @property
    def root_page(self) -> int:
        return self.header.root_page

    def cost_params(self, alpha: float = 0.5, aggregate="sum") -> CostParams:
        return CostParams(alpha=alpha, aggregate=aggregate, d_max=self.header.d_max,
                          w_max=self.header.w_max, weights=self.weights)

    def tokens(self, ids) -> frozenset:
        return frozenset(self.vocabulary[int(i)] for i in ids)

    def read_node(self, page_id: int, counters: Optional[AccessCounters] = None) -> IRTreeNode:
        kind, payload, pages = self._reader.read_record(page_id)
        if kind not in (KIND_INTERIOR, KIND_LEAF):
            raise IndexFormatError(f"page {page_id} is not a tree node")
        level, count, ppage, x0, y0, x1, y1, nsum = _NODE_HEAD.unpack_from(payload)
        off = _NODE_HEAD.size
        summary = np.frombuffer(payload, dtype="<u4", count=nsum, offset=off)
        off += 4 * nsum
        node = IRTreeNode(page_id=page_id, level=level, mbr=(x0, y0, x1, y1),
                          keyword_summary=summary, postings_page=ppage)
        if kind == KIND_LEAF:
            node.objects = np.frombuffer(payload, dtype=_LEAF_ENTRY, count=count, offset=off)
            if counters is not None:
                counters.leaf_node_reads += pages
        else:
            pages_, mbrs, offsets, chunks = [], np.empty((count, 4)), [0], []
            for i in range(count):
                cp, a, b, c, d, cn = _CHILD.unpack_from(payload, off)
                off += _CHILD.size
                pages_.append(cp)
                mbrs[i] = (a, b, c, d)
                chunks.append(np.frombuffer(payload, dtype="<u4", count=cn, offset=off))
                off += 4 * cn
                offsets.append(offsets[-1] + cn)
            node.child_pages = pages_
            node.child_mbrs = mbrs
            node.child_summary_ids = np.concatenate(chunks) if chunks else np.empty(0, "<u4")
            node.child_summary_offsets = np.array(offsets, dtype=np.int64)
            if counters is not None:
                counters.interior_node_reads += pages
        if counters is not None:
            counters.nodes_read += 1
        return node

    def read_postings(self, node: IRTreeNode, counters: Optional[AccessCounters] = None) -> LeafInvertedFile:
        if not node.is_leaf:
            raise InputError("only leaves carry inverted files")
        kind, payload, pages = self._reader.read_record(node.postings_page)
        if kind != KIND_POSTINGS:
            raise IndexFormatError(f"page {node.postings_page} is not an inverted file")
        (nkeys,) = struct.unpack_from("<I", payload)
        off = 4
        postings = {}
        for _ in range(nkeys):
            kw, cnt = struct.unpack_from("<II", payload, off)
            off += 8
            postings[kw] = np.frombuffer(payload, dtype="<u8", count=cnt, offset=off)
            off += 8 * cnt
        if counters is not None:
            counters.inverted_file_reads += pages
        return LeafInvertedFile(node.postings_page, postings)

    def iter_nodes(self, counters: Optional[AccessCounters] = None):
        """Depth-first walk yielding every node once (root first)."""
        stack = [self.root_page]
        while stack:
            node = self.read_node(stack.pop(), counters)
            yield node
            if not node.is_leaf:
                stack.extend(reversed(node.child_pages))

    def objects(self, counters: Optional[AccessCounters] = None) -> list:
        """Reconstruct the indexed objects from leaves and inverted files."""
        out = []
        for node in self.iter_nodes(counters):
            if not node.is_leaf:
                continue
            inv = self.read_postings(node, counters)
            kws: dict = {}
            for kw, ids in inv.postings.items():
                for oid in ids.tolist():
                    kws.setdefault(oid, set()).add(self.vocabulary[kw])
            for row in node.objects:
                oid = int(row["id"])
                out.append(SpatioTextualObject(oid, (float(row["x"]), float(row["y"])),
                                               frozenset(kws.get(oid, ()))))
        out.sort(key=lambda o: o.id)
        return out


def open_index(path) -> IRTree:
    return IRTree(path)


# ------------------------------------------------------------------- audit

@dataclass
class AuditReport:
    nodes: int = 0
    objects: int = 0
    structural: list = field(default_factory=list)
    bound_checks: int = 0
    bound_violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.structural and not self.bound_violations


def _contains(outer: Rect, inner: Rect) -> bool:
    return outer[0] <= inner[0] and outer[1] <= inner[1] and outer[2] >= inner[2] and outer[3] >= inner[3]


def audit_index(tree: IRTree, probes: Iterable[QueryPoint] = (), params: Optional[CostParams] = None,
                tol: float = 1e-12) -> AuditReport:
    """Full structural audit, plus node-bound checks for each probe query.

    For every parent/child pair the parent's node cost must not exceed
    the child's; for every leaf the node cost must not exceed any member
    object's cost.
    """
    probes = list(probes)
    params = params or tree.cost_params()
    rep = AuditReport()
    fanout = tree.header.fanout
    for node in tree.iter_nodes():
        rep.nodes += 1
        if not 1 <= len(node) <= fanout:
            rep.structural.append(f"node {node.page_id}: {len(node)} entries")
        summary = set(node.keyword_summary.tolist())
        node_tokens = tree.tokens(summary)
        if node.is_leaf:
            inv = tree.read_postings(node)
            ids = set(node.objects["id"].tolist())
            rep.objects += len(ids)
            if set(inv.postings) != summary:
                rep.structural.append(f"leaf {node.page_id}: posting keys differ from summary")
            members: dict = {oid: set() for oid in ids}
            for kw, plist in inv.postings.items():
                for oid in plist.tolist():
                    if oid not in members:
                        rep.structural.append(f"leaf {node.page_id}: foreign object {oid} in postings")
                    else:
                        members[oid].add(tree.vocabulary[kw])
            for row in node.objects:
                pt = (float(row["x"]), float(row["y"]))
                if not _contains(node.mbr, pt + pt):
                    rep.structural.append(f"leaf {node.page_id}: object {int(row['id'])} outside mbr")
                obj = SpatioTextualObject(int(row["id"]), pt, frozenset(members[int(row["id"])]))
                for q in probes:
                    rep.bound_checks += 1
                    a = cost_node(q, node.mbr, node_tokens, params)
                    b = cost_object(q, obj, params)
                    if a > b + tol:
                        rep.bound_violations.append((node.page_id, obj.id, a, b))
        else:
            union = set()
            for i, page in enumerate(node.child_pages):
                child = tree.read_node(page)
                cmbr = tuple(float(v) for v in node.child_mbrs[i])
                csum = node.child_summary(i).tolist()
                union.update(csum)
                if cmbr != child.mbr or csum != child.keyword_summary.tolist():
                    rep.structural.append(f"node {node.page_id}: entry {i} disagrees with child {page}")
                if child.level != node.level - 1:
                    rep.structural.append(f"node {node.page_id}: child {page} at wrong level")
                if not _contains(node.mbr, cmbr):
                    rep.structural.append(f"node {node.page_id}: child {page} mbr not contained")
                child_tokens = tree.tokens(csum)
                for q in probes:
                    rep.bound_checks += 1
                    a = cost_node(q, node.mbr, node_tokens, params)
                    b = cost_node(q, cmbr, child_tokens, params)
                    if a > b + tol:
                        rep.bound_violations.append((node.page_id, page, a, b))
            if union != summary:
                rep.structural.append(f"node {node.page_id}: summary is not the union of its children")
    if rep.objects != tree.header.object_count:
        rep.structural.append(f"found {rep.objects} objects, header says {tree.header.object_count}")
    return rep
