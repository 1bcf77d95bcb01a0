"""Parameter sweeps measuring page accesses and running time.

One CSV row per (swept value, algorithm, aggregate).  Counter columns are
means over the query groups of a point and are reproducible under a fixed
seed; the elapsed column is wall-clock and is not.
"""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from dataclasses import dataclass, field, fields
from typing import Optional

from .engine import ALGORITHMS, QuerySpec, run_query
from .irtree import build_index, open_index
from .model import Aggregate, InputError
from .storage import AccessCounters
from .workload import GenConfig, gen_objects, gen_query_groups

# swept parameter -> where it lives
SWEEPS = {
    "k": "experiment",
    "n": "group_size",
    "m_percent": "experiment",
    "keywords_per_query": "keywords_per_query",
    "query_space_fraction": "query_space_fraction",
    "keyword_set_fraction": "keyword_set_fraction",
    "alpha": "experiment",
    "object_count": "object_count",
}

COUNTER_FIELDS = ("page_accesses", "interior_node_reads", "leaf_node_reads", "inverted_file_reads",
                  "nodes_read", "objects_scored", "nodes_pruned", "nodes_enqueued")
CSV_COLUMNS = (("param", "value", "algorithm", "aggregate", "repetitions", "mean_elapsed_ms")
               + tuple(f"mean_{c}" for c in COUNTER_FIELDS) + ("pruning_power",))

_DATA_FIELDS = ("seed", "object_count", "vocabulary_size", "keywords_per_object", "keyword_skew", "data_space")


def subgroup_size(n: int, m_percent: float) -> int:
    """``m_percent`` of ``n``, rounded half up, kept within [1, n]."""
    return min(n, max(1, math.floor(n * m_percent / 100.0 + 0.5)))


@dataclass(frozen=True)
class Experiment:
    param: str
    values: tuple
    gen: GenConfig = field(default_factory=GenConfig)
    repetitions: int = 20
    algorithms: tuple = ALGORITHMS
    aggregates: tuple = ("sum",)
    k: int = 10
    m_percent: float = 60.0
    alpha: float = 0.5
    fanout: int = 50
    page_size: int = 4096
    relaxed_prune: bool = False
    output: Optional[str] = None

    def __post_init__(self):
        if self.param not in SWEEPS:
            raise InputError(f"unknown sweep parameter {self.param!r}; choose from {', '.join(SWEEPS)}")
        if not self.values:
            raise InputError("a sweep needs at least one value")
        if self.repetitions < 1:
            raise InputError("repetitions must be at least 1")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise InputError(f"unknown algorithms: {', '.join(bad)}")
        for a in self.aggregates:
            Aggregate.parse(a)
        if not 0 < self.m_percent <= 100:
            raise InputError("m_percent must lie in (0, 100]")

    @classmethod
    def from_config(cls, values: dict) -> "Experiment":
        """From ``key=value`` pairs; generator keys go to :class:`GenConfig`."""
        values = dict(values)
        if "param" not in values or "values" not in values:
            raise InputError("a bench config needs 'param' and 'values'")
        param = values.pop("param")
        cast = int if param in ("k", "n", "keywords_per_query", "object_count") else float
        kw = {"param": param,
              "values": tuple(cast(v) for v in values.pop("values").split(",") if v.strip())}
        for name in ("algorithms", "aggregates"):
            if name in values:
                kw[name] = tuple(v.strip().lower() for v in values.pop(name).split(",") if v.strip())
        for f in fields(cls):
            if f.name in values and f.name not in kw:
                raw = values.pop(f.name)
                if f.name == "output":
                    kw[f.name] = raw
                elif f.name == "relaxed_prune":
                    kw[f.name] = raw.lower() in ("1", "true", "yes")
                elif f.name in ("repetitions", "k", "fanout", "page_size"):
                    kw[f.name] = int(raw)
                else:
                    kw[f.name] = float(raw)
        kw["gen"] = GenConfig.from_mapping(values)
        return cls(**kw)

    def point(self, value) -> tuple:
        """``(GenConfig, k, m_percent, alpha)`` at one swept value."""
        where = SWEEPS[self.param]
        if where != "experiment":
            return self.gen.with_(**{where: value}), self.k, self.m_percent, self.alpha
        settings = {"k": self.k, "m_percent": self.m_percent, "alpha": self.alpha}
        settings[self.param] = value
        return self.gen, int(settings["k"]), float(settings["m_percent"]), float(settings["alpha"])


def _data_key(config: GenConfig) -> tuple:
    return tuple(getattr(config, f) for f in _DATA_FIELDS)


def run_experiment(exp: Experiment, workdir=None) -> str:
    """Run the sweep; returns the CSV text and writes it to ``exp.output`` if set."""
    own = None
    if workdir is None:
        own = tempfile.TemporaryDirectory(prefix="fgsk-bench-")
        workdir = own.name
    datasets: dict = {}
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    try:
        for value in exp.values:
            config, k, m_percent, alpha = exp.point(value)
            key = _data_key(config)
            if key not in datasets:
                objects = gen_objects(config)
                path = os.path.join(workdir, f"sweep-{len(datasets)}.idx")
                build_index(objects, path, fanout=exp.fanout, page_size=exp.page_size)
                datasets[key] = (objects, path)
            objects, path = datasets[key]
            groups = gen_query_groups(config, objects, exp.repetitions)
            n = config.group_size
            m = subgroup_size(n, m_percent)
            with open_index(path) as tree:
                for agg in exp.aggregates:
                    params = tree.cost_params(alpha, agg)
                    for name in exp.algorithms:
                        total, elapsed = AccessCounters(), 0.0
                        for group in groups:
                            kw = {"k": k}
                            if not name.startswith("gnnk"):
                                kw["m"] = m
                            if name == "mfsnnk-bf":
                                kw["relaxed_prune"] = exp.relaxed_prune
                            result = run_query(tree, QuerySpec.from_name(name, group, params, **kw))
                            total += result.counters
                            elapsed += result.elapsed
                        reps = len(groups)
                        counts = total.as_dict()
                        writer.writerow([exp.param, value, name, Aggregate.parse(agg).value, reps,
                                         f"{elapsed * 1000.0 / reps:.3f}"]
                                        + [repr(counts[c] / reps) for c in COUNTER_FIELDS]
                                        + [repr(total.pruning_power)])
    finally:
        if own is not None:
            own.cleanup()
    text = buf.getvalue()
    if exp.output:
        with open(exp.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def read_rows(text: str) -> list:
    """Parse CSV text produced by :func:`run_experiment` into dicts."""
    return list(csv.DictReader(io.StringIO(text)))
