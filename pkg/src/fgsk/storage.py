"""Fixed-size page file with chained records and per-query access counters.

Layout: page 0 holds the index header; every other page starts with a
20-byte page header ``(kind, flags, reserved, payload_len, next_page,
crc32)`` followed by up to ``page_size - 20`` payload bytes.  A logical
record longer than one page continues in ``next_page``; 0 ends a chain
(page 0 is never part of a chain).  All integers are little-endian.
"""

from __future__ import annotations

import os
import struct
import zlib
from dataclasses import dataclass, asdict, fields

MAGIC = b"FGSKIRT\x00"
VERSION = 1
MIN_PAGE_SIZE = 512

KIND_INTERIOR = 1
KIND_LEAF = 2
KIND_POSTINGS = 3
KIND_VOCAB = 4

PAGE_HEADER = struct.Struct("<BBHIQI")

_HEADER = struct.Struct("<8sIIIIQQQQQQQdd4dB")


class IndexFormatError(Exception):
    """Corrupt, truncated or incompatible index file."""


@dataclass
class AccessCounters:
    """Logical reads made by one query.

    The three ``*_reads`` fields count pages, so a record spilling over
    a chain of three pages costs three reads.  ``nodes_read`` counts node
    records regardless of their length.
    """

    interior_node_reads: int = 0
    leaf_node_reads: int = 0
    inverted_file_reads: int = 0
    objects_scored: int = 0
    nodes_pruned: int = 0
    nodes_enqueued: int = 0
    nodes_read: int = 0

    @property
    def page_accesses(self) -> int:
        return self.interior_node_reads + self.leaf_node_reads + self.inverted_file_reads

    @property
    def pruning_power(self) -> float:
        seen = self.nodes_pruned + self.nodes_read
        return self.nodes_pruned / seen if seen else 0.0

    def __iadd__(self, other: "AccessCounters") -> "AccessCounters":
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))
        return self

    def __add__(self, other: "AccessCounters") -> "AccessCounters":
        out = AccessCounters(**asdict(self))
        out += other
        return out

    def as_dict(self) -> dict:
        d = asdict(self)
        d["page_accesses"] = self.page_accesses
        return d


@dataclass(frozen=True)
class IndexHeader:
    page_size: int
    fanout: int
    height: int
    object_count: int
    root_page: int
    page_count: int
    tree_page_count: int
    node_count: int
    vocab_page: int
    vocab_count: int
    d_max: float
    w_max: float
    bbox: tuple
    exact_dmax: bool
    version: int = VERSION

    def pack(self) -> bytes:
        body = _HEADER.pack(MAGIC, self.version, self.page_size, self.fanout, self.height,
                            self.object_count, self.root_page, self.page_count,
                            self.tree_page_count, self.node_count, self.vocab_page,
                            self.vocab_count, self.d_max, self.w_max, *self.bbox,
                            int(self.exact_dmax))
        return body + struct.pack("<I", zlib.crc32(body))

    @classmethod
    def unpack(cls, raw: bytes) -> "IndexHeader":
        if len(raw) < _HEADER.size + 4:
            raise IndexFormatError("truncated header")
        body = raw[:_HEADER.size]
        (crc,) = struct.unpack_from("<I", raw, _HEADER.size)
        if zlib.crc32(body) != crc:
            raise IndexFormatError("header checksum mismatch")
        vals = _HEADER.unpack(body)
        if vals[0] != MAGIC:
            raise IndexFormatError("not an IR-tree index file (bad magic)")
        if vals[1] != VERSION:
            raise IndexFormatError(f"unsupported index version {vals[1]} (expected {VERSION})")
        return cls(page_size=vals[2], fanout=vals[3], height=vals[4], object_count=vals[5],
                   root_page=vals[6], page_count=vals[7], tree_page_count=vals[8],
                   node_count=vals[9], vocab_page=vals[10], vocab_count=vals[11],
                   d_max=vals[12], w_max=vals[13], bbox=tuple(vals[14:18]),
                   exact_dmax=bool(vals[18]), version=vals[1])


HEADER_BYTES = _HEADER.size + 4


class PageWriter:
    """Accumulates pages in memory; records are laid out in call order."""

    def __init__(self, page_size: int):
        if page_size < MIN_PAGE_SIZE:
            raise ValueError(f"page size must be at least {MIN_PAGE_SIZE} bytes")
        self.page_size = page_size
        self.capacity = page_size - PAGE_HEADER.size
        self.pages: list = [b""]  # page 0 reserved for the header

    def append(self, kind: int, payload: bytes) -> tuple:
        """Store a record; returns ``(first_page, page_count)``."""
        first = len(self.pages)
        chunks = [payload[i:i + self.capacity] for i in range(0, len(payload), self.capacity)] or [b""]
        for i, chunk in enumerate(chunks):
            nxt = first + i + 1 if i + 1 < len(chunks) else 0
            head = PAGE_HEADER.pack(kind, 0, 0, len(chunk), nxt, zlib.crc32(chunk))
            self.pages.append((head + chunk).ljust(self.page_size, b"\x00"))
        return first, len(chunks)

    def write(self, path, header: IndexHeader) -> None:
        raw = header.pack()
        self.pages[0] = raw.ljust(self.page_size, b"\x00")
        tmp = f"{path}.tmp"
        with open(tmp, "wb") as fh:
            for page in self.pages:
                fh.write(page)
        os.replace(tmp, path)


class PageReader:
    """Read-only page access via ``pread``; safe to share between threads."""

    def __init__(self, path):
        self.path = os.fspath(path)
        self._fd = os.open(self.path, os.O_RDONLY)
        try:
            raw = os.pread(self._fd, HEADER_BYTES, 0)
            self.header = IndexHeader.unpack(raw)
            size = os.fstat(self._fd).st_size
            if size != self.header.page_count * self.header.page_size:
                raise IndexFormatError(
                    f"file size {size} does not match {self.header.page_count} pages "
                    f"of {self.header.page_size} bytes")
        except Exception:
            os.close(self._fd)
            raise
        self.page_size = self.header.page_size

    def close(self) -> None:
        if self._fd >= 0:
            os.close(self._fd)
            self._fd = -1

    def read_page(self, page_id: int) -> tuple:
        if not 0 < page_id < self.header.page_count:
            raise IndexFormatError(f"page id {page_id} out of range")
        raw = os.pread(self._fd, self.page_size, page_id * self.page_size)
        kind, _flags, _res, length, nxt, crc = PAGE_HEADER.unpack_from(raw)
        if length > self.page_size - PAGE_HEADER.size:
            raise IndexFormatError(f"page {page_id}: bad payload length")
        payload = raw[PAGE_HEADER.size:PAGE_HEADER.size + length]
        if zlib.crc32(payload) != crc:
            raise IndexFormatError(f"page {page_id}: checksum failure")
        return kind, payload, nxt

    def read_record(self, page_id: int) -> tuple:
        """Follow a chain; returns ``(kind, payload, pages_read)``."""
        kind, payload, nxt = self.read_page(page_id)
        parts = [payload]
        pages = 1
        while nxt:
            k, payload, nxt = self.read_page(nxt)
            if k != kind:
                raise IndexFormatError(f"chain from page {page_id} changes kind")
            parts.append(payload)
            pages += 1
            if pages > self.header.page_count:
                raise IndexFormatError(f"cyclic page chain from page {page_id}")
        return kind, b"".join(parts), pages
