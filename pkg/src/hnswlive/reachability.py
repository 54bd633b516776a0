"""Unreachable-point auditing.

Two notions are tracked. The structural one flags live points with outgoing
edges but zero incoming edges across *all* layers (the entry point excepted:
it is findable regardless). The behavioral one runs an exhaustive search
(k = ef = live count) from the entry point's own vector and flags whatever
the search cannot produce; it additionally catches points stranded behind
other stranded points. A plain directed traversal over the union of all
layers serves as the ground-truth oracle for both.

Audits require a quiescent index; they take no locks themselves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import LayeredGraph
from .search import knn_search


def _indegrees(g: LayeredGraph) -> np.ndarray:
    indeg = np.zeros(g.size, dtype=np.int64)
    for layer in range(g.n_layers):
        cnt = g._adj_cnt[layer][:g.size]
        if not cnt.any():
            continue
        adj = g._adj[layer][:g.size]
        mask = np.arange(adj.shape[1])[None, :] < cnt[:, None]
        targets = adj[mask]
        indeg += np.bincount(targets, minlength=g.size)
    return indeg


def count_indegree_zero(g: LayeredGraph) -> set[int]:
    """Labels of live points with zero in-degree over all layers, excluding
    the entry point."""
    if g.size == 0:
        return set()
    indeg = _indegrees(g)
    out = set()
    for slot in range(g.size):
        if indeg[slot] == 0 and not g.deleted[slot] and slot != g.entry_point:
            out.add(int(g.labels[slot]))
    return out


def unreachable_by_search(g: LayeredGraph) -> set[int]:
    """Live labels an exhaustive search cannot produce.

    Probes with the entry point's own vector and k = ef = live count, so the
    beam degenerates to a full best-first sweep of whatever layer 0 can reach
    from the entry point.
    """
    live = g.live_count
    if live == 0:
        return set()
    probe = g.vectors[g.entry_point]
    found = knn_search(g, probe, k=live, ef=live)
    live_set = {int(lbl) for lbl in g.labels[:g.size][~g.deleted[:g.size]]}
    return live_set - set(found.labels)


def traversal_reachable(g: LayeredGraph) -> set[int]:
    """Labels reachable from the entry point over the union of all layers'
    directed edges (deleted points traversed and included)."""
    if g.entry_point < 0:
        return set()
    seen = np.zeros(g.size, dtype=bool)
    seen[g.entry_point] = True
    stack = [g.entry_point]
    while stack:
        slot = stack.pop()
        for layer in range(int(g.levels[slot]) + 1):
            cnt = g._adj_cnt[layer][slot]
            for t in g._adj[layer][slot, :cnt]:
                if not seen[t]:
                    seen[t] = True
                    stack.append(int(t))
    return {int(lbl) for lbl in g.labels[:g.size][seen] if lbl >= 0}


@dataclass
class ReachabilityReport:
    """Both unreachable-point counts for one audit pass."""

    indegree_zero: set[int]
    search_unreachable: set[int]
    live_count: int

    CSV_HEADER = "iteration,indegree_zero_count,search_unreachable_count,live_count"

    def csv_row(self, iteration: int) -> str:
        return (f"{iteration},{len(self.indegree_zero)},"
                f"{len(self.search_unreachable)},{self.live_count}")


def reachability_report(g: LayeredGraph) -> ReachabilityReport:
    return ReachabilityReport(
        indegree_zero=count_indegree_zero(g),
        search_unreachable=unreachable_by_search(g),
        live_count=g.live_count,
    )
