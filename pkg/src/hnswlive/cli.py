"""Command-line interface: build, run-scenario, audit, gt, search-eval.

Datasets come from fvecs files (--dataset) or a seeded synthetic generator
(--synthetic N,DIM). All configuration is via flags; exit status is 0 on
success and nonzero with a diagnostic line on any error.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from .errors import HnswError
from .graph import IndexParams, LayeredGraph, audit_structure
from .io import load_fvecs, load_ivecs, save_index, save_ivecs, load_index, synthetic_vectors
from .metrics import brute_force_gt, recall_at_k
from .reachability import reachability_report
from .scenarios import ScenarioConfig, metrics_to_csv, run_scenario
from .search import insert, knn_search
from .updates import StrategyKind, UpdateStrategy

STRATEGY_NAMES = [k.value for k in StrategyKind]


def _add_index_params(p):
    p.add_argument("--M", type=int, default=16, help="max out-degree at layers >= 1")
    p.add_argument("--M-max0", type=int, default=None, dest="m_max0",
                   help="max out-degree at layer 0 (default 2*M)")
    p.add_argument("--efc", type=int, default=200, help="construction beam width")
    p.add_argument("--metric", choices=["l2", "ip", "cosine"], default="l2")
    p.add_argument("--seed", type=int, default=0, help="RNG seed")


def _add_data_source(p, required=True):
    grp = p.add_mutually_exclusive_group(required=required)
    grp.add_argument("--dataset", help="fvecs file of base vectors")
    grp.add_argument("--synthetic", metavar="N,DIM",
                     help="seeded gaussian dataset, e.g. 10000,32")


def _load_data(args) -> np.ndarray:
    if getattr(args, "dataset", None):
        return load_fvecs(args.dataset)
    n, dim = (int(x) for x in args.synthetic.split(","))
    return synthetic_vectors(n, dim, seed=args.seed)


def _params(args) -> IndexParams:
    return IndexParams(M=args.M, M_max0=args.m_max0, ef_construction=args.efc,
                       metric=args.metric, rng_seed=args.seed)


def _build_index(data: np.ndarray, params: IndexParams) -> LayeredGraph:
    g = LayeredGraph(params, data.shape[1], capacity=len(data))
    for i, row in enumerate(data):
        insert(g, row, i)
    return g


def cmd_build(args) -> int:
    data = _load_data(args)
    g = _build_index(data, _params(args))
    save_index(g, args.out)
    print(f"built index over {g.size} points (dim {g.dim}, "
          f"max layer {g.max_layer}) -> {args.out}")
    return 0


def cmd_audit(args) -> int:
    g = load_index(args.index)
    report = reachability_report(g)
    structure = audit_structure(g)
    print(f"live points: {report.live_count}")
    print(f"indegree_zero_count: {len(report.indegree_zero)}")
    print(f"search_unreachable_count: {len(report.search_unreachable)}")
    print(structure.summary())
    return 0


def cmd_gt(args) -> int:
    base = _load_data(args)
    queries = load_fvecs(args.queries) if args.queries else base
    gt = brute_force_gt(base, queries, args.k, metric=args.metric)
    save_ivecs(args.out, gt.astype(np.int32))
    print(f"wrote ground truth for {len(queries)} queries (k={args.k}) -> {args.out}")
    return 0


def cmd_run_scenario(args) -> int:
    data = _load_data(args)
    queries = load_fvecs(args.queries) if args.queries else None
    cfg = ScenarioConfig(
        kind=args.scenario,
        data=data,
        iterations=args.iterations,
        batch_size=args.batch,
        strategy=UpdateStrategy.from_name(args.strategy),
        params=_params(args),
        dual_index_enabled=args.dual_index,
        tau=args.tau,
        rng_seed=args.seed,
        k=args.k,
        ef=args.ef,
        recall_stride=args.recall_stride,
        queries=queries,
        exclude_unreachable=args.exclude_unreachable,
    )
    result = run_scenario(cfg)
    metrics_to_csv(result.records, args.out)
    last = result.records[-1]
    print(f"{args.scenario}/{args.strategy}: {len(result.records)} iterations, "
          f"final indegree_zero={last.indegree_zero_count} "
          f"search_unreachable={last.search_unreachable_count} -> {args.out}")
    for it, u in result.rebuild_events:
        print(f"  backup rebuild at iteration {it}: |U|={u}")
    return 0


def cmd_search_eval(args) -> int:
    if args.index:
        g = load_index(args.index)
        base = g.vectors[:g.size][~g.deleted[:g.size]]
        labels = g.labels[:g.size][~g.deleted[:g.size]]
    else:
        data = _load_data(args)
        g = _build_index(data, _params(args))
        base, labels = data, None
    queries = load_fvecs(args.queries) if args.queries else base
    ef_values = [int(x) for x in args.ef.split(",")]
    if args.gt:
        gt = load_ivecs(args.gt)[:, :args.k].astype(np.int64)
    else:
        gt = brute_force_gt(base, queries, args.k, metric=g.params.metric,
                            labels=labels)
    rows = ["ef,recall,mean_query_time"]
    for ef in ef_values:
        ef = max(ef, args.k)
        total = 0.0
        t0 = time.perf_counter()
        for i, q in enumerate(queries):
            res = knn_search(g, q, args.k, ef)
            total += recall_at_k(res, gt[i], args.k)
        elapsed = (time.perf_counter() - t0) / len(queries)
        rows.append(f"{ef},{total / len(queries):.6f},{elapsed:.8f}")
    text = "\n".join(rows) + "\n"
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hnswlive",
        description="HNSW index with real-time updates: build, replay "
                    "update scenarios, audit reachability, evaluate search.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build an index and save a snapshot")
    _add_data_source(p)
    _add_index_params(p)
    p.add_argument("--out", required=True, help="snapshot output path")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("audit", help="print unreachable counts for a snapshot")
    p.add_argument("--index", required=True, help="snapshot path")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("gt", help="write brute-force ground truth as ivecs")
    _add_data_source(p)
    p.add_argument("--queries", help="fvecs query file (default: the dataset)")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--metric", choices=["l2", "ip", "cosine"], default="l2")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="ivecs output path")
    p.set_defaults(func=cmd_gt)

    p = sub.add_parser("run-scenario", help="replay an update scenario")
    _add_data_source(p)
    _add_index_params(p)
    p.add_argument("--scenario", required=True,
                   choices=["full_coverage", "random", "new_data"])
    p.add_argument("--strategy", required=True, choices=STRATEGY_NAMES)
    p.add_argument("--iterations", type=int, required=True)
    p.add_argument("--batch", type=int, required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--ef", type=int, default=100)
    p.add_argument("--tau", type=int, default=40_000)
    p.add_argument("--dual-index", action="store_true")
    p.add_argument("--recall-stride", type=int, default=0,
                   help="compute recall every N iterations (0 = never)")
    p.add_argument("--exclude-unreachable", action="store_true",
                   help="random scenario: never sample already-stranded points")
    p.add_argument("--queries", help="fvecs query file for recall checkpoints")
    p.add_argument("--out", required=True, help="metrics CSV output path")
    p.set_defaults(func=cmd_run_scenario)

    p = sub.add_parser("search-eval", help="sweep ef and report recall/time")
    _add_data_source(p, required=False)
    _add_index_params(p)
    p.add_argument("--index", help="snapshot path (alternative to --dataset)")
    p.add_argument("--queries", help="fvecs query file (default: the dataset)")
    p.add_argument("--gt", help="precomputed ground-truth ivecs file")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--ef", default="10,20,40,80,160,320",
                   help="comma-separated ef values to sweep")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.set_defaults(func=cmd_search_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "search-eval":
        if not (args.index or args.dataset or args.synthetic):
            parser.error("search-eval needs --index, --dataset or --synthetic")
    try:
        return args.func(args)
    except (HnswError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
