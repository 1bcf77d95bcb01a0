"""Seeded synthetic datasets and query groups.

Randomness comes from numpy's PCG64 with one independent stream per
purpose, derived from the configured seed through ``SeedSequence``
spawn keys:

    (0,)     object locations
    (1,)     object keywords
    (2, g)   query group number ``g``
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np

from .model import InputError, QueryGroup, QueryPoint, Rect, SpatioTextualObject

STREAM_LOCATIONS = 0
STREAM_KEYWORDS = 1
STREAM_QUERIES = 2


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    object_count: int = 100_000
    vocabulary_size: int = 1000
    keywords_per_object: float = 2.91
    keyword_skew: float = 1.0  # Zipf exponent of keyword popularity; 0 = uniform
    data_space: Rect = (0.0, 0.0, 1000.0, 1000.0)
    group_size: int = 10
    query_space_fraction: float = 0.0001  # of the data-space area
    keywords_per_query: int = 4
    keyword_set_fraction: float = 0.03
    max_retries: int = 1000

    def __post_init__(self):
        for name in ("object_count", "vocabulary_size", "group_size", "keywords_per_query", "max_retries"):
            if getattr(self, name) < 1:
                raise InputError(f"{name} must be at least 1")
        for name in ("query_space_fraction", "keyword_set_fraction"):
            if not 0 < getattr(self, name) <= 1:
                raise InputError(f"{name} must lie in (0, 1]")
        if self.keyword_skew < 0:
            raise InputError("keyword_skew must be non-negative")
        if not self.keywords_per_object >= 1:
            raise InputError("keywords_per_object must be at least 1")
        x0, y0, x1, y1 = self.data_space
        if not (x0 < x1 and y0 < y1):
            raise InputError(f"degenerate data space {self.data_space}")

    @classmethod
    def from_mapping(cls, values: dict) -> "GenConfig":
        """Build from string values (``key=value`` config files); unknown keys are ignored."""
        kw = {}
        for f in fields(cls):
            if f.name not in values:
                continue
            raw = values[f.name]
            if f.name == "data_space":
                kw[f.name] = tuple(float(v) for v in str(raw).split(","))
            elif f.type in ("int", int):
                kw[f.name] = int(raw)
            else:
                kw[f.name] = float(raw)
        return cls(**kw)

    def with_(self, **changes) -> "GenConfig":
        return replace(self, **changes)


def poisson_rate_for_mean(mean: float) -> float:
    """Rate whose zero-truncated Poisson distribution has the given mean."""
    if mean <= 1.0:
        return 0.0
    lam = mean
    for _ in range(200):
        lam = mean * (1.0 - math.exp(-lam))
    return lam


def keyword_token(i: int) -> str:
    return f"t{i + 1}"


def gen_objects(config: GenConfig) -> list:
    n, vocab = config.object_count, config.vocabulary_size
    x0, y0, x1, y1 = config.data_space
    loc = stream(config.seed, STREAM_LOCATIONS).random((n, 2))
    xs = x0 + loc[:, 0] * (x1 - x0)
    ys = y0 + loc[:, 1] * (y1 - y0)

    rng = stream(config.seed, STREAM_KEYWORDS)
    lam = poisson_rate_for_mean(config.keywords_per_object)
    counts = rng.poisson(lam, n) if lam > 0 else np.ones(n, dtype=np.int64)
    while True:
        zero = counts == 0
        if not zero.any():
            break
        counts[zero] = rng.poisson(lam, int(zero.sum()))
    counts = np.minimum(counts, vocab)

    if config.keyword_skew > 0:
        p = 1.0 / np.arange(1, vocab + 1, dtype=np.float64) ** config.keyword_skew
        p /= p.sum()
    else:
        p = None
    buffer: list = []

    def draw(count: int) -> list:
        nonlocal buffer
        if len(buffer) < count:
            buffer = buffer + rng.choice(vocab, size=max(4096, count), p=p).tolist()
        out, buffer = buffer[:count], buffer[count:]
        return out

    objects = []
    for i in range(n):
        chosen: set = set()
        c = int(counts[i])
        while len(chosen) < c:
            chosen.update(draw(c - len(chosen)))
        objects.append(SpatioTextualObject(i, (float(xs[i]), float(ys[i])),
                                           frozenset(keyword_token(k) for k in chosen)))
    return objects


def gen_query_groups(config: GenConfig, objects, count: int, first: int = 0) -> list:
    """``count`` groups, numbered ``first, first + 1, ...`` (each has its own stream)."""
    if not objects:
        raise InputError("query generation needs a non-empty dataset")
    xs = np.array([o.location[0] for o in objects])
    ys = np.array([o.location[1] for o in objects])
    x0, y0, x1, y1 = config.data_space
    half = math.sqrt(config.query_space_fraction * (x1 - x0) * (y1 - y0)) / 2.0
    groups = []
    for g in range(first, first + count):
        rng = stream(config.seed, STREAM_QUERIES, g)
        for _ in range(config.max_retries):
            cx = x0 + rng.random() * (x1 - x0)
            cy = y0 + rng.random() * (y1 - y0)
            inside = np.flatnonzero((np.abs(xs - cx) <= half) & (np.abs(ys - cy) <= half))
            pool = sorted(set().union(*(objects[i].keywords for i in inside.tolist())))
            if pool:
                break
        else:
            raise InputError(f"no object keywords inside {config.max_retries} sampled query squares")
        size = max(config.keywords_per_query, math.ceil(config.keyword_set_fraction * len(pool)))
        size = min(size, len(pool))
        subset = [pool[i] for i in sorted(rng.choice(len(pool), size, replace=False).tolist())]
        take = min(config.keywords_per_query, len(subset))
        members = []
        for _ in range(config.group_size):
            qx = cx - half + rng.random() * 2 * half
            qy = cy - half + rng.random() * 2 * half
            kws = frozenset(subset[i] for i in rng.choice(len(subset), take, replace=False).tolist())
            members.append(QueryPoint((qx, qy), kws))
        groups.append(QueryGroup(tuple(members)))
    return groups


def gen_query_group(config: GenConfig, objects, index: int = 0) -> QueryGroup:
    return gen_query_groups(config, objects, 1, first=index)[0]
