"""Command-line entry point: ``fgsk build|query|gen-data|gen-queries|bench``."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .bench import Experiment, run_experiment
from .engine import ALGORITHMS, QuerySpec, run_query
from .formats import read_config, read_dataset, read_queries, read_weights, write_dataset, write_queries
from .irtree import build_index, open_index
from .model import InputError
from .oracle import expected_entries
from .storage import IndexFormatError
from .workload import GenConfig, gen_objects, gen_query_groups


class CliError(Exception):
    pass


def _existing(path: str, what: str) -> str:
    if not os.path.isfile(path):
        raise CliError(f"no such {what}: {path}")
    return path


def _header_dict(header) -> dict:
    return {
        "object_count": header.object_count,
        "height": header.height,
        "fanout": header.fanout,
        "page_size": header.page_size,
        "page_count": header.page_count,
        "node_count": header.node_count,
        "vocabulary_size": header.vocab_count,
        "d_max": header.d_max,
        "w_max": header.w_max,
        "exact_dmax": header.exact_dmax,
        "bbox": list(header.bbox),
    }


def cmd_build(args) -> int:
    objects = read_dataset(_existing(args.data, "dataset"))
    weights = read_weights(_existing(args.weights, "weights file")) if args.weights else None
    header = build_index(objects, args.out, fanout=args.fanout, page_size=args.page_size,
                         exact_dmax=args.exact_dmax, weights=weights)
    print(json.dumps({"index": args.out, **_header_dict(header)}))
    return 0


def _same_answer(got, want) -> bool:
    if len(got) != len(want):
        return False
    return all((g.object_id, g.cost, g.size, set(g.subgroup)) == (w.object_id, w.cost, w.size, set(w.subgroup))
               for g, w in zip(got, want))


def cmd_query(args, parser) -> int:
    groups = read_queries(_existing(args.queries, "query file"))
    objects = None
    if args.oracle_check:
        if not args.data:
            parser.error("--oracle-check needs --data (the dataset the index was built from)")
        objects = read_dataset(_existing(args.data, "dataset"))
    variant = args.algo.split("-")[0]
    for i, g in enumerate(groups):
        if args.m is not None and not 1 <= args.m <= len(g):
            parser.error(f"--m {args.m} must lie in [1, {len(g)}] (group {i} has {len(g)} members)")
        if variant != "gnnk" and args.m is None:
            parser.error(f"--m is required for {args.algo}")
    failed = False
    with open_index(_existing(args.index, "index")) as tree:
        params = tree.cost_params(args.alpha, args.agg)
        for i, group in enumerate(groups):
            kw = {"k": args.k, "relaxed_prune": args.relaxed_prune}
            if variant != "gnnk":
                kw["m"] = args.m
            spec = QuerySpec.from_name(args.algo, group, params, **kw)
            result = run_query(tree, spec)
            out = {"group": i, **result.to_dict(with_elapsed=not args.no_elapsed)}
            if objects is not None:
                ok = _same_answer(result.entries, expected_entries(objects, spec))
                out["oracle_check"] = "pass" if ok else "fail"
                failed |= not ok
            print(json.dumps(out))
    if failed:
        print("error: results differ from the brute-force oracle", file=sys.stderr)
        return 1
    return 0


def _gen_config(args) -> GenConfig:
    values = read_config(_existing(args.config, "config file")) if args.config else {}
    for key in ("seed", "object_count", "vocabulary_size", "keywords_per_object", "keyword_skew",
                "group_size", "keywords_per_query", "query_space_fraction", "keyword_set_fraction"):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = str(v)
    return GenConfig.from_mapping(values)


def cmd_gen_data(args) -> int:
    config = _gen_config(args)
    objects = gen_objects(config)
    write_dataset(objects, args.out)
    print(json.dumps({"dataset": args.out, "objects": len(objects), "seed": config.seed}))
    return 0


def cmd_gen_queries(args) -> int:
    config = _gen_config(args)
    objects = read_dataset(_existing(args.data, "dataset"))
    values = read_config(args.config) if args.config else {}
    if "data_space" not in values and objects:
        xs = [o.location[0] for o in objects]
        ys = [o.location[1] for o in objects]
        if min(xs) < max(xs) and min(ys) < max(ys):
            config = config.with_(data_space=(min(xs), min(ys), max(xs), max(ys)))
    groups = gen_query_groups(config, objects, args.groups)
    write_queries(groups, args.out)
    print(json.dumps({"queries": args.out, "groups": len(groups), "seed": config.seed}))
    return 0


def cmd_bench(args) -> int:
    values = read_config(_existing(args.config, "config file"))
    if args.out:
        values["output"] = args.out
    exp = Experiment.from_config(values)
    text = run_experiment(exp)
    if not exp.output:
        sys.stdout.write(text)
    return 0


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _gen_flags(p) -> None:
    p.add_argument("--config", help="key=value generator config")
    p.add_argument("--seed", type=int)
    p.add_argument("--group-size", dest="group_size", type=_positive_int)
    p.add_argument("--keywords-per-query", dest="keywords_per_query", type=_positive_int)
    p.add_argument("--query-space-fraction", dest="query_space_fraction", type=float)
    p.add_argument("--keyword-set-fraction", dest="keyword_set_fraction", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fgsk", description="Flexible group spatial keyword queries")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="bulk-load an IR-tree index file from a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--fanout", type=int, default=50)
    p.add_argument("--page-size", dest="page_size", type=int, default=4096)
    p.add_argument("--exact-dmax", dest="exact_dmax", action="store_true",
                   help="use the true maximum pairwise distance (slow) instead of the bounding-box diagonal")
    p.add_argument("--weights", help="keyword<TAB>weight file; absent keywords weigh 1")

    p = sub.add_parser("query", help="answer query groups against an index")
    p.add_argument("--index", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--algo", required=True, choices=ALGORITHMS)
    p.add_argument("--agg", default="sum", choices=("sum", "max", "min"))
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--k", type=_positive_int, default=1)
    p.add_argument("--m", type=int, help="subgroup size (minimum size for mfsnnk)")
    p.add_argument("--relaxed-prune", dest="relaxed_prune", action="store_true")
    p.add_argument("--oracle-check", dest="oracle_check", action="store_true",
                   help="compare against a linear scan of --data; exit 1 on mismatch")
    p.add_argument("--data", help="dataset file, needed by --oracle-check")
    p.add_argument("--no-elapsed", dest="no_elapsed", action="store_true",
                   help="omit timings so output is reproducible")

    p = sub.add_parser("gen-data", help="write a seeded synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--count", dest="object_count", type=_positive_int)
    p.add_argument("--vocabulary-size", dest="vocabulary_size", type=_positive_int)
    p.add_argument("--keywords-per-object", dest="keywords_per_object", type=float)
    p.add_argument("--keyword-skew", dest="keyword_skew", type=float)

    p = sub.add_parser("gen-queries", help="write seeded query groups for a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--groups", type=_positive_int, default=20)
    _gen_flags(p)

    p = sub.add_parser("bench", help="run a parameter sweep and write CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="CSV path (default: stdout or the config's output key)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "build":
            return cmd_build(args)
        if args.command == "query":
            return cmd_query(args, parser)
        if args.command == "gen-data":
            return cmd_gen_data(args)
        if args.command == "gen-queries":
            return cmd_gen_queries(args)
        return cmd_bench(args)
    except (CliError, InputError, IndexFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
