"""Deletion and replacement-insertion strategies.

Deletion is a tombstone: the slot keeps its vector and out-edges and keeps
routing searches, it is only excluded from results and queued for reuse.
Replacement insertion pops the oldest tombstone, repairs the neighborhood it
leaves behind, then installs the new point in the vacated slot at the same
level.

Two repair families are provided. The baseline rebuilds the out-list of
*every* one-hop neighbor of the vacated slot from its one-hop plus two-hop
neighborhood (candidate pools of order M^2, so O(M^3) selection work per
layer). The mutual-neighbor family rebuilds only the neighbors that actually
hold an edge back to the vacated slot, from O(M)-sized pools (O(M^2) per
layer), optionally widening the occlusion rule (alpha > 1) or the repair set
(two-hop neighbors that point back at the vacated slot).

All operations here are writers under the graph's locking discipline.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import (AlreadyDeleted, DuplicateLabel, InvalidState,
                     ParameterError, UnknownLabel)
from .graph import LayeredGraph
from .search import _alpha_eff, insert, relink_slot


class StrategyKind(enum.Enum):
    """Replacement-insertion strategy selector.

    Values double as the external (CLI) names.
    """

    HNSW_RU = "hnsw-ru"
    MN_RU_ALPHA = "mn-ru-alpha"
    MN_RU_BETA = "mn-ru-beta"
    MN_RU_GAMMA = "mn-ru-gamma"
    MN_THN_RU = "mn-thn-ru"


_DEFAULT_ALPHA = {
    StrategyKind.HNSW_RU: 1.0,
    StrategyKind.MN_RU_ALPHA: 1.0,
    StrategyKind.MN_RU_BETA: 1.0,
    StrategyKind.MN_RU_GAMMA: 1.1,
    StrategyKind.MN_THN_RU: 1.1,
}


@dataclass(frozen=True)
class UpdateStrategy:
    """A strategy kind plus its occlusion factor.

    ``alpha`` defaults per kind: 1.0 for the baseline and the alpha/beta
    mutual-neighbor variants, 1.1 for gamma and the two-hop variant.
    """

    kind: StrategyKind
    alpha: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.alpha is None:
            object.__setattr__(self, "alpha", _DEFAULT_ALPHA[self.kind])
        if self.alpha < 1.0:
            raise ParameterError(f"alpha must be >= 1, got {self.alpha}")

    @classmethod
    def from_name(cls, name: str, alpha: float | None = None) -> "UpdateStrategy":
        try:
            kind = StrategyKind(name)
        except ValueError:
            names = ", ".join(k.value for k in StrategyKind)
            raise ParameterError(f"unknown strategy {name!r}; expected one of {names}")
        return cls(kind, alpha)

    @property
    def name(self) -> str:
        return self.kind.value


@dataclass
class LayerRepair:
    """What one layer's repair pass touched."""

    layer: int
    repair_set: list[int]  # slots whose out-lists were rebuilt
    candidates: dict[int, list[int]] = field(default_factory=dict)
    new_point_in_candidates: bool = True


@dataclass
class RepairPlan:
    """Record of a repair around one vacated slot, layer by layer."""

    deleted_slot: int
    layers: list[LayerRepair] = field(default_factory=list)

    def touched_slots(self) -> set[int]:
        out = set()
        for lr in self.layers:
            out.update(lr.repair_set)
        return out


def mark_delete(g: LayeredGraph, label: int):
    """Flag a live point as deleted and queue its slot for reuse.

    Adjacency is untouched; subsequent searches exclude the label but keep
    routing through the slot.
    """
    with g.write_lock:
        label = int(label)
        slot = g.label_index.get(label)
        if slot is None:
            raise UnknownLabel(label)
        if g.deleted[slot]:
            raise AlreadyDeleted(f"label {label} is already deleted")
        g.deleted[slot] = True
        g.deleted_list.append(slot)
        g._live -= 1


# -- vectorized neighborhood helpers ----------------------------------------


def _out_targets(g: LayeredGraph, slots: np.ndarray, layer: int) -> np.ndarray:
    """Unique out-neighbors of a slot set at one layer, ascending."""
    if slots.size == 0:
        return np.empty(0, dtype=np.int64)
    rows = g._adj[layer][slots]
    counts = g._adj_cnt[layer][slots]
    mask = np.arange(rows.shape[1])[None, :] < counts[:, None]
    return np.unique(rows[mask].astype(np.int64))


def _linking_back(g: LayeredGraph, slots: np.ndarray, target: int,
                  layer: int) -> np.ndarray:
    """Subset of ``slots`` holding an edge to ``target``, order preserved."""
    if slots.size == 0:
        return slots
    rows = g._adj[layer][slots]
    counts = g._adj_cnt[layer][slots]
    mask = np.arange(rows.shape[1])[None, :] < counts[:, None]
    hits = ((rows == target) & mask).any(axis=1)
    return slots[hits]


class _Pool:
    """A candidate pool shared across selections: graph slots plus the
    incoming point as a virtual last entry targeting the vacated slot."""

    def __init__(self, g: LayeredGraph, slots: np.ndarray, vacated: int,
                 new_vec: np.ndarray, new_label: int):
        slots = slots[slots != vacated]
        slots = slots[~g.deleted[slots]]
        self.slots = slots
        self.vacated = vacated
        self.vecs = np.ascontiguousarray(
            np.vstack([g.vectors[slots], new_vec[None, :]]))
        self.keys = np.append(g.labels[slots], np.int64(new_label))
        self._metric = g.params.metric_code
        self._alpha_cache = {}

    def select(self, g: LayeredGraph, u: int, bound: int, alpha: float) -> list[int]:
        """Rebuild list for u: select from the pool minus u itself."""
        alpha_eff = self._alpha_cache.get(alpha)
        if alpha_eff is None:
            alpha_eff = _alpha_eff(alpha, g.params.metric)
            self._alpha_cache[alpha] = alpha_eff
        kept = kernels.occlusion_select(
            self._metric, self.vecs, self.keys, g.vectors[u], alpha_eff,
            bound, np.int64(g.labels[u]))
        n = self.slots.size
        return [self.vacated if i == n else int(self.slots[i]) for i in kept]

    def member_slots(self) -> list[int]:
        return [int(s) for s in self.slots]


def hnsw_ru_insert(g: LayeredGraph, vector, label: int) -> int:
    """Baseline replacement insertion.

    With no tombstones this is a plain insertion. Otherwise the oldest
    tombstone d is reused: at each layer of d, every one-hop neighbor v of d
    has its out-list rebuilt from d's one-hop and two-hop neighborhood plus
    the incoming point; then the new point overwrites slot d and the slot is
    re-linked at layers 0..level(d) with beam width ef_construction.
    """
    with g.write_lock:
        v = g.check_vector(vector)
        label = g.check_label(label)
        if g.is_live(label):
            raise DuplicateLabel(f"label {label} is live in the index")
        if not g.deleted_list:
            return insert(g, v, label)
        d = g.deleted_list.popleft()
        for layer in range(int(g.levels[d]) + 1):
            n1 = g.neighbors(d, layer).astype(np.int64)
            two_hop = _out_targets(g, n1, layer)
            pool = _Pool(g, np.union1d(n1, two_hop), d, v, label)
            bound = g.layer_bound(layer)
            for v_j in n1:
                g.set_neighbors(v_j, layer, pool.select(g, int(v_j), bound, 1.0))
        g.install(d, v, label)
        relink_slot(g, d)
        return d


def ru_candidate_pool(g: LayeredGraph, d: int, layer: int) -> tuple[list[int], list[int]]:
    """One-hop neighbors of d and the baseline repair pool (one-hop plus
    two-hop, deduplicated, before filtering) at a layer. Exposed for
    inspection and tests."""
    n1 = g.neighbors(d, layer).astype(np.int64)
    two_hop = _out_targets(g, n1, layer)
    return [int(s) for s in n1], [int(s) for s in np.union1d(n1, two_hop)]


def mn_repair(g: LayeredGraph, deleted_slot: int, vector, label: int,
              strategy: UpdateStrategy, record_candidates: bool = False) -> RepairPlan:
    """Mutual-neighbor connectivity repair around a vacated slot.

    For each layer 0..level(deleted_slot), N1 is the slot's out-neighbors and
    N2 the members of N1 that hold an edge back to it. The repair set and
    per-node candidate pool depend on the strategy:

    * ``mn-ru-alpha``: repair N2; one shared pool N1 + neighbors-of-N1.
    * ``mn-ru-beta``: repair N2; per-node pool N1 + the node's own neighbors.
    * ``mn-ru-gamma``: as beta with alpha = 1.1.
    * ``mn-thn-ru``: as gamma, and the repair set additionally includes
      two-hop neighbors of the vacated slot that hold an edge to it.

    Every pool also contains the incoming point (``vector``/``label``), which
    will occupy ``deleted_slot``; currently-deleted slots and the vacated
    slot's previous occupant are excluded. Returns the plan of what was
    touched (with per-node candidate pools when ``record_candidates``).
    """
    with g.write_lock:
        if strategy.kind == StrategyKind.HNSW_RU:
            raise ParameterError("mn_repair does not apply to the baseline strategy")
        if not g.deleted[deleted_slot]:
            raise InvalidState(f"slot {deleted_slot} is not flagged deleted")
        label = g.check_label(label)
        if g.is_live(label):
            raise DuplicateLabel(f"label {label} is live in the index")
        v = g.check_vector(vector)
        d = int(deleted_slot)
        plan = RepairPlan(deleted_slot=d)
        for layer in range(int(g.levels[d]) + 1):
            n1 = g.neighbors(d, layer).astype(np.int64)
            n2 = _linking_back(g, n1, d, layer)
            repair_set = [int(u) for u in n2]
            if strategy.kind == StrategyKind.MN_THN_RU:
                two_hop = _out_targets(g, n1, layer)
                extras = two_hop[~np.isin(two_hop, n1)]
                extras = extras[extras != d]
                repair_set.extend(int(w) for w in
                                  _linking_back(g, extras, d, layer))
            shared = None
            if strategy.kind == StrategyKind.MN_RU_ALPHA:
                shared = _Pool(g, np.union1d(n1, _out_targets(g, n1, layer)),
                               d, v, label)
            lr = LayerRepair(layer=layer, repair_set=list(repair_set))
            bound = g.layer_bound(layer)
            for u in repair_set:
                if shared is not None:
                    pool = shared
                else:
                    own = g.neighbors(u, layer).astype(np.int64)
                    pool = _Pool(g, np.union1d(n1, own), d, v, label)
                g.set_neighbors(u, layer, pool.select(g, u, bound, strategy.alpha))
                if record_candidates:
                    lr.candidates[u] = [s for s in pool.member_slots() if s != u]
            plan.layers.append(lr)
        return plan


def mn_update_insert(g: LayeredGraph, deleted_slot: int, vector, label: int) -> int:
    """Install a new point into a repaired slot, inheriting its level.

    Greedy descent from the index top layer to level(deleted_slot) + 1, then
    beam search with ef_construction and bidirectional linking at each layer
    down to 0, exactly as a fresh insertion at that level would do. The
    slot's vector and label are replaced, its deleted flag cleared, and it
    leaves the reuse queue.
    """
    with g.write_lock:
        v = g.check_vector(vector)
        label = g.check_label(label)
        if g.is_live(label):
            raise DuplicateLabel(f"label {label} is live in the index")
        if not g.deleted[deleted_slot]:
            raise InvalidState(f"slot {deleted_slot} is not flagged deleted")
        d = int(deleted_slot)
        g.install(d, v, label)
        try:
            g.deleted_list.remove(d)
        except ValueError:
            pass
        relink_slot(g, d)
        return d


def replace_update(g: LayeredGraph, vector, label: int,
                   strategy: UpdateStrategy) -> int:
    """Insert a point, reusing the oldest tombstone when one exists.

    Dispatch: with an empty reuse queue this is a plain insertion under every
    strategy; the baseline strategy delegates to :func:`hnsw_ru_insert`;
    otherwise the oldest tombstone is popped, repaired with
    :func:`mn_repair`, and the point installed with
    :func:`mn_update_insert`. Returns the occupied slot.
    """
    with g.write_lock:
        if not g.deleted_list:
            return insert(g, vector, label)
        if strategy.kind == StrategyKind.HNSW_RU:
            return hnsw_ru_insert(g, vector, label)
        slot = g.deleted_list.popleft()
        mn_repair(g, slot, vector, label, strategy)
        return mn_update_insert(g, slot, vector, label)
