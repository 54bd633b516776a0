"""Shared builders and independent oracles for the test suite.

The oracles here (naive k-NN, naive in-degree scan, naive structure scan)
are deliberately dumb pure-Python re-derivations so they stay independent of
the code paths they check.
"""

from __future__ import annotations

import numpy as np
import pytest

from hnswlive import IndexParams, LayeredGraph, insert


def small_params(**overrides) -> IndexParams:
    kw = dict(M=4, M_max0=8, ef_construction=8, rng_seed=0)
    kw.update(overrides)
    return IndexParams(**kw)


def hand_graph(vectors, edges=(), levels=None, labels=None, entry=0,
               params=None, capacity=None) -> LayeredGraph:
    """Build a graph with explicit topology, bypassing insertion.

    ``edges`` is an iterable of (src_slot, dst_slot, layer). Slot i holds
    vectors[i] with label labels[i] (default i) at level levels[i]
    (default 0). The entry slot must sit at the top level.
    """
    vectors = np.asarray(vectors, dtype=np.float32)
    n = len(vectors)
    if params is None:
        params = small_params()
    if levels is None:
        levels = [0] * n
    if labels is None:
        labels = list(range(n))
    g = LayeredGraph(params, vectors.shape[1], capacity or n)
    for i in range(n):
        g.allocate(vectors[i], labels[i], levels[i])
    g.entry_point = entry
    g.max_layer = max(levels)
    assert levels[entry] == g.max_layer, "entry must occupy the top layer"
    for src, dst, layer in edges:
        row = list(g.neighbors(src, layer))
        row.append(dst)
        g.set_neighbors(src, layer, row)
    return g


def build_index(data, params=None, capacity=None) -> LayeredGraph:
    data = np.asarray(data, dtype=np.float32)
    if params is None:
        params = IndexParams(M=8, ef_construction=64, rng_seed=0)
    g = LayeredGraph(params, data.shape[1], capacity or len(data))
    for i, row in enumerate(data):
        insert(g, row, i)
    return g


def naive_knn(base, labels, query, k, metric="l2"):
    """Independent exact k-NN: python loop + sort, ties by ascending label."""
    def dist(a, b):
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if metric == "l2":
            return float(((a - b) ** 2).sum())
        if metric == "ip":
            return 1.0 - float((a * b).sum())
        na, nb = np.linalg.norm(a), np.linalg.norm(b)
        if na == 0 or nb == 0:
            return 1.0
        return 1.0 - float((a * b).sum()) / (na * nb)

    scored = sorted((dist(query, v), int(l)) for v, l in zip(base, labels))
    return [l for _, l in scored[:k]]


def naive_indegrees(g: LayeredGraph) -> dict[int, int]:
    """In-degree per slot over all layers, by plain python iteration."""
    indeg = {s: 0 for s in range(g.size)}
    for layer in range(g.n_layers):
        for s in range(g.size):
            for t in g.neighbors(s, layer):
                indeg[int(t)] += 1
    return indeg


def naive_structure_ok(g: LayeredGraph) -> list[str]:
    """Re-derive the structural invariants without audit_structure."""
    problems = []
    for layer in range(g.n_layers):
        bound = g.params.M_max0 if layer == 0 else g.params.M
        for s in range(g.size):
            row = [int(t) for t in g.neighbors(s, layer)]
            if len(row) > bound:
                problems.append(f"slot {s} layer {layer}: degree {len(row)}")
            if s in row:
                problems.append(f"slot {s} layer {layer}: self edge")
            for t in row:
                if not (0 <= t < g.size):
                    problems.append(f"slot {s} layer {layer}: dangling {t}")
    if g.size and not (0 <= g.entry_point < g.size):
        problems.append("missing entry point")
    return problems


def adjacency_snapshot(g: LayeredGraph):
    """Hashable copy of all out-lists, for diffing around an operation."""
    snap = {}
    for layer in range(g.n_layers):
        for s in range(g.size):
            snap[(layer, s)] = tuple(int(t) for t in g.neighbors(s, layer))
    return snap


@pytest.fixture(scope="session")
def gaussian_1k():
    from hnswlive import synthetic_vectors
    return synthetic_vectors(1000, 16, seed=11)
