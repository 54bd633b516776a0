"""Workload replay: the three update scenarios with per-iteration metrics.

``full_coverage`` walks the dataset in equal segments, deleting and
reinserting each segment once per iteration so every point gets churned.
``random`` deletes and reinserts a seeded random batch of live labels per
iteration, optionally excluding points that are already structurally
unreachable (the demonstration protocol). ``new_data`` starts from the first
half of the dataset and swaps a batch of old points for new ones each
iteration until only the second half remains.

Runs are bit-reproducible under a fixed seed and a single thread: CSV output
is identical across runs except for the wall-time column. The runner itself
is single-threaded; wall time covers only the delete + reinsert phase, with
audits and recall checkpoints running untimed between iterations.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .dual import DualIndex
from .errors import ConfigError
from .graph import IndexParams, LayeredGraph
from .metrics import brute_force_gt, recall_at_k
from .reachability import count_indegree_zero, reachability_report
from .search import insert, knn_search
from .updates import UpdateStrategy, mark_delete, replace_update

SCENARIO_KINDS = ("full_coverage", "random", "new_data")

CSV_HEADER = ("iteration,update_wall_time,indegree_zero_count,"
              "search_unreachable_count,recall_at_k,ef,k")


@dataclass
class ScenarioConfig:
    """One workload description.

    ``data`` is the full dataset (row i gets label i). For ``new_data`` the
    initial index holds the first iterations * batch_size rows and the same
    number of fresh rows must follow them. ``queries`` defaults to a seeded
    sample of ``n_queries`` dataset rows, used at recall checkpoints every
    ``recall_stride`` iterations (0 disables them). ``exclude_unreachable``
    selects the demonstration protocol for the random scenario: sampled
    batches avoid points that are already structurally unreachable.
    """

    kind: str
    data: np.ndarray
    iterations: int
    batch_size: int
    strategy: UpdateStrategy
    params: IndexParams = field(default_factory=IndexParams)
    dual_index_enabled: bool = False
    tau: int = 40_000
    rng_seed: int = 0
    k: int = 10
    ef: int = 100
    recall_stride: int = 0
    n_queries: int = 100
    queries: np.ndarray | None = None
    exclude_unreachable: bool = False

    def initial_size(self) -> int:
        n = len(self.data)
        return self.iterations * self.batch_size if self.kind == "new_data" else n

    def validate(self):
        if self.kind not in SCENARIO_KINDS:
            raise ConfigError(f"unknown scenario kind {self.kind!r}")
        if self.iterations < 1 or self.batch_size < 1:
            raise ConfigError("iterations and batch_size must be >= 1")
        n = len(self.data)
        if n == 0:
            raise ConfigError("dataset is empty")
        if self.kind == "full_coverage" and self.iterations * self.batch_size != n:
            raise ConfigError(
                f"full_coverage needs iterations * batch_size == dataset size "
                f"({self.iterations} * {self.batch_size} != {n})")
        if self.kind == "random" and self.batch_size > n:
            raise ConfigError("batch_size exceeds the dataset size")
        if self.kind == "new_data" and n < 2 * self.initial_size():
            raise ConfigError(
                f"new_data needs dataset size >= 2 * initial index size "
                f"({n} < {2 * self.initial_size()})")
        if self.ef < self.k:
            raise ConfigError(f"ef ({self.ef}) must be >= k ({self.k})")
        if self.recall_stride < 0:
            raise ConfigError("recall_stride must be >= 0")


@dataclass
class MetricsRecord:
    """Per-iteration measurements."""

    iteration: int
    update_wall_time: float
    indegree_zero_count: int
    search_unreachable_count: int
    recall_at_k: float | None
    ef: int
    k: int

    def csv_row(self) -> str:
        recall = "" if self.recall_at_k is None else f"{self.recall_at_k:.6f}"
        return (f"{self.iteration},{self.update_wall_time:.6f},"
                f"{self.indegree_zero_count},{self.search_unreachable_count},"
                f"{recall},{self.ef},{self.k}")


@dataclass
class ScenarioResult:
    records: list[MetricsRecord]
    graph: LayeredGraph
    dual: DualIndex | None
    rebuild_events: list[tuple[int, int]]  # (iteration, |U| at rebuild)


def metrics_to_csv(records, path_or_file):
    """Write records as CSV with the fixed documented header."""
    rows = [CSV_HEADER] + [r.csv_row() for r in records]
    text = "\n".join(rows) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w") as f:
            f.write(text)


def _checkpoint_recall(g: LayeredGraph, queries: np.ndarray, k: int, ef: int) -> float:
    mask = ~g.deleted[:g.size]
    live_vecs = g.vectors[:g.size][mask]
    live_labels = g.labels[:g.size][mask]
    gt = brute_force_gt(live_vecs, queries, k, metric=g.params.metric,
                        labels=live_labels)
    total = 0.0
    for i, q in enumerate(queries):
        res = knn_search(g, q, k, ef)
        total += recall_at_k(res, gt[i], k)
    return total / len(queries)


def run_scenario(cfg: ScenarioConfig, on_iteration=None) -> ScenarioResult:
    """Replay a workload and collect one record per iteration.

    ``on_iteration(iteration, graph, dual)`` is invoked after each
    iteration's untimed audit phase.
    """
    cfg.validate()
    rng = np.random.default_rng(cfg.rng_seed)
    data = np.ascontiguousarray(cfg.data, dtype=np.float32)
    n = len(data)
    n_init = cfg.initial_size()

    g = LayeredGraph(cfg.params, data.shape[1], capacity=n_init)
    for i in range(n_init):
        insert(g, data[i], i)
    dual = DualIndex(g, cfg.tau) if cfg.dual_index_enabled else None

    if cfg.queries is not None:
        queries = np.ascontiguousarray(cfg.queries, dtype=np.float32)
    else:
        picks = rng.choice(n, size=min(cfg.n_queries, n), replace=False)
        queries = data[np.sort(picks)]

    records: list[MetricsRecord] = []
    rebuild_events: list[tuple[int, int]] = []

    for it in range(1, cfg.iterations + 1):
        if cfg.kind == "full_coverage":
            batch_labels = list(range((it - 1) * cfg.batch_size,
                                      it * cfg.batch_size))
            replacements = [(data[lbl], lbl) for lbl in batch_labels]
        elif cfg.kind == "random":
            pool = g.live_labels()
            if cfg.exclude_unreachable:
                stranded = count_indegree_zero(g)
                if stranded:
                    keep = ~np.isin(pool, np.fromiter(stranded, dtype=np.int64))
                    pool = pool[keep]
            batch_labels = [int(x) for x in
                            rng.choice(pool, size=cfg.batch_size, replace=False)]
            replacements = [(data[lbl], lbl) for lbl in batch_labels]
        else:  # new_data
            lo = (it - 1) * cfg.batch_size
            batch_labels = list(range(lo, lo + cfg.batch_size))
            replacements = [(data[n_init + lbl], n_init + lbl)
                            for lbl in batch_labels]

        seen_rebuilds = len(dual.rebuild_log) if dual else 0
        t0 = time.perf_counter()
        for lbl in batch_labels:
            mark_delete(g, lbl)
        for vec, lbl in replacements:
            if dual is not None:
                dual.replace_update(vec, lbl, cfg.strategy)
            else:
                replace_update(g, vec, lbl, cfg.strategy)
        wall = time.perf_counter() - t0

        report = reachability_report(g)
        recall = None
        if cfg.recall_stride and it % cfg.recall_stride == 0:
            recall = _checkpoint_recall(g, queries, cfg.k, cfg.ef)
        records.append(MetricsRecord(
            iteration=it,
            update_wall_time=wall,
            indegree_zero_count=len(report.indegree_zero),
            search_unreachable_count=len(report.search_unreachable),
            recall_at_k=recall,
            ef=cfg.ef,
            k=cfg.k,
        ))
        if dual is not None:
            for _, u_size in dual.rebuild_log[seen_rebuilds:]:
                rebuild_events.append((it, u_size))
        if on_iteration is not None:
            on_iteration(it, g, dual)

    return ScenarioResult(records=records, graph=g, dual=dual,
                          rebuild_events=rebuild_events)
