"""Layer-restricted beam search, occlusion-based neighbor selection, point
insertion, and k-NN queries over a :class:`~hnswlive.graph.LayeredGraph`.

Queries are safe under concurrent readers; insertion follows the writer
discipline declared by the graph module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (CapacityError, DuplicateLabel, EmptyIndexError,
                     InputError, ParameterError)
from .graph import METRIC_CODES, LayeredGraph


@dataclass
class SearchResult:
    """Query result: (label, distance) pairs ascending by (distance, label)."""

    entries: list[tuple[int, float]]

    @property
    def labels(self) -> list[int]:
        return [lbl for lbl, _ in self.entries]

    @property
    def distances(self) -> list[float]:
        return [d for _, d in self.entries]

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def _alpha_eff(alpha: float, metric: str) -> float:
    # The occlusion rule compares metric distances. The l2 kernel returns
    # squared values, so the factor is applied squared to stay equivalent to
    # alpha * d(s, e) > d(q, e) in euclidean terms.
    return alpha * alpha if metric == "l2" else alpha


def search_layer(g: LayeredGraph, query, entries, ef: int, layer: int,
                 *, live_only: bool = False) -> list[tuple[int, float]]:
    """Best-first expansion at one layer from a set of entry slots.

    Returns up to ``ef`` (slot, distance) pairs ascending. Deleted slots may
    appear unless ``live_only`` is set; they always participate in routing.
    """
    if ef < 1:
        raise ParameterError(f"ef must be >= 1, got {ef}")
    entry_slots = np.asarray(list(entries), dtype=np.int64)
    if entry_slots.size == 0:
        raise InputError("entry set is empty")
    if layer < 0 or layer >= g.n_layers:
        raise InputError(f"layer {layer} does not exist")
    if (entry_slots < 0).any() or (entry_slots >= g.size).any():
        raise InputError("entry set contains unallocated slots")
    if (g.levels[entry_slots] < layer).any():
        raise InputError(f"entry set contains slots below layer {layer}")
    q = g.check_vector(query)
    slots, dists = kernels.beam_search(
        g.params.metric_code, g.vectors, g.labels, g.deleted,
        g._adj[layer], g._adj_cnt[layer], q, entry_slots, ef, live_only)
    return list(zip(slots.tolist(), dists.tolist()))


def select_neighbors(query, candidates, m: int, alpha: float = 1.0,
                     metric: str = "l2") -> list:
    """Pick up to ``m`` diverse neighbors from ``candidates``.

    Candidates are (key, vector) pairs. Repeatedly takes the candidate e
    closest to ``query`` and keeps it iff alpha * d(s, e) > d(q, e) for every
    already-kept s. With alpha = 1 this is the classic diversity heuristic;
    alpha > 1 retains more borderline edges. Equal distances are broken by
    ascending key. Returns the kept keys in selection order.
    """
    if alpha < 1.0:
        raise ParameterError(f"alpha must be >= 1, got {alpha}")
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    if metric not in METRIC_CODES:
        raise ParameterError(f"unknown metric {metric!r}")
    cands = list(candidates)
    if not cands:
        return []
    keys = [k for k, _ in cands]
    vecs = np.ascontiguousarray([v for _, v in cands], dtype=np.float32)
    q = np.ascontiguousarray(query, dtype=np.float32)
    if vecs.ndim != 2 or q.ndim != 1 or vecs.shape[1] != q.shape[0]:
        raise InputError("query and candidate vectors must share one dimension")
    key_arr = np.asarray(keys, dtype=np.int64)
    kept = kernels.occlusion_select(
        METRIC_CODES[metric], vecs, key_arr, q, _alpha_eff(alpha, metric), m)
    return [keys[i] for i in kept]


# ---------------------------------------------------------------------------
# Internal linking machinery (shared with the update strategies).
# ---------------------------------------------------------------------------


def _select_slots(g: LayeredGraph, query_vec: np.ndarray, cand_slots,
                  bound: int, alpha: float,
                  extra_vec: np.ndarray | None = None,
                  extra_key: int | None = None) -> list[int]:
    """Occlusion-select among graph slots, optionally with one virtual
    candidate (a point not yet stored in any slot). Returns kept slots, with
    the virtual candidate reported as -1."""
    slots = np.asarray(list(cand_slots), dtype=np.int64)
    if slots.size == 0 and extra_vec is None:
        return []
    vecs = g.vectors[slots]
    keys = g.labels[slots]
    if extra_vec is not None:
        vecs = np.vstack([vecs, extra_vec[None, :]]) if slots.size else extra_vec[None, :]
        keys = np.append(keys, np.int64(extra_key))
    vecs = np.ascontiguousarray(vecs, dtype=np.float32)
    kept = kernels.occlusion_select(
        g.params.metric_code, vecs, keys, query_vec,
        _alpha_eff(alpha, g.params.metric), bound)
    out = []
    for i in kept:
        out.append(-1 if i == slots.size else int(slots[i]))
    return out


def _add_backlink(g: LayeredGraph, nb: int, slot: int, layer: int):
    """Add edge nb -> slot, shrinking nb's list with the selection heuristic
    when it would overflow the layer bound."""
    adj = g._adj[layer]
    cnt_arr = g._adj_cnt[layer]
    cnt = int(cnt_arr[nb])
    row = adj[nb, :cnt]
    if (row == slot).any():
        return
    bound = g.layer_bound(layer)
    if cnt < bound:
        adj[nb, cnt] = slot
        cnt_arr[nb] = cnt + 1
        return
    cands = np.append(row.astype(np.int64), np.int64(slot))
    kept = _select_slots(g, g.vectors[nb], cands, bound, 1.0)
    g.set_neighbors(nb, layer, kept)


def _link_at_layer(g: LayeredGraph, slot: int, layer: int,
                   beam: list[tuple[int, float]]):
    """Choose the slot's out-list from a beam and add bidirectional edges."""
    cands = [s for s, _ in beam if s != slot and not g.deleted[s]]
    selected = _select_slots(g, g.vectors[slot], cands, g.params.M, 1.0)
    g.set_neighbors(slot, layer, selected)
    for nb in selected:
        _add_backlink(g, nb, slot, layer)


def _descend(g: LayeredGraph, q: np.ndarray, stop_layer: int) -> int:
    """Greedy ef=1 descent from the entry point down to stop_layer + 1."""
    ep = g.entry_point
    d = float(kernels.distance_kernel(g.params.metric_code, q, g.vectors[ep]))
    for layer in range(g.max_layer, stop_layer, -1):
        ep, d = kernels.greedy_step(
            g.params.metric_code, g.vectors,
            g._adj[layer], g._adj_cnt[layer], q, ep, d)
    return int(ep)


def _link_descent(g: LayeredGraph, slot: int, level: int):
    """Wire a slot into layers min(level, max_layer)..0: beam with
    ef_construction per layer, select, connect bidirectionally."""
    q = g.vectors[slot]
    top = min(level, g.max_layer)
    ep = _descend(g, q, top)
    entries = [ep]
    for layer in range(top, -1, -1):
        beam = search_layer(g, q, entries, g.params.ef_construction, layer)
        _link_at_layer(g, slot, layer, beam)
        entries = [s for s, _ in beam]


def relink_slot(g: LayeredGraph, slot: int):
    """Re-wire an existing slot at every layer 0..level(slot), overwriting its
    out-lists. Stale in-edges from elsewhere are left alone by design."""
    _link_descent(g, slot, int(g.levels[slot]))


def insert(g: LayeredGraph, vector, label: int, *, level: int | None = None) -> int:
    """Insert a new point and return its slot.

    The point draws a top layer from the seeded generator (or uses ``level``
    when given, which is mainly useful for constructing test topologies),
    then descends greedily to its level and links with beam width
    ef_construction at each layer it occupies.
    """
    with g.write_lock:
        v = g.check_vector(vector)
        label = g.check_label(label)
        if g.is_live(label):
            raise DuplicateLabel(f"label {label} is live in the index")
        if g.size >= g.capacity:
            raise CapacityError(
                f"capacity {g.capacity} exhausted; use replace_update to "
                f"reuse deleted slots")
        if level is None:
            level = g.draw_level()
        slot = g.allocate(v, label, level)
        if g.entry_point < 0:
            g.entry_point = slot
            g.max_layer = level
            return slot
        _link_descent(g, slot, level)
        if level > g.max_layer:
            g.entry_point = slot
            g.max_layer = level
        return slot


def knn_search(g: LayeredGraph, query, k: int, ef: int) -> SearchResult:
    """k nearest live neighbors of ``query``.

    Greedy descent from the top layer, then a beam of width ``ef`` at layer
    0. Deleted slots route but are never returned. Returns up to
    min(k, live found) entries ascending by (distance, label).
    """
    if g.entry_point < 0:
        raise EmptyIndexError("index holds no points")
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if ef < k:
        raise ParameterError(f"ef ({ef}) must be >= k ({k})")
    q = g.check_vector(query)
    ep = _descend(g, q, 0)
    found = search_layer(g, q, [ep], ef, 0, live_only=True)
    entries = [(int(g.labels[s]), d) for s, d in found[:k]]
    return SearchResult(entries)
