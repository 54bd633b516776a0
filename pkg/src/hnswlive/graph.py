"""Layered proximity-graph storage: slots, labels, deletion flags, audits.

Storage is slot-based. A slot is allocated once and reused only by a
replacement insertion; its vector, label, level, deletion flag and per-layer
adjacency live in flat arrays so the compiled kernels can walk them directly.
Deleted slots keep their vectors and out-edges and keep routing searches;
they are only filtered from results.

Concurrency: searches and audits may run concurrently with each other, but
no read may overlap a mutation. Mutating operations (insert, delete,
replace) serialize on ``write_lock``; callers that mix readers and writers
across threads must hold the same discipline (many readers xor one writer).
"""

from __future__ import annotations

import math
import threading
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DimensionMismatch, InputError, ParameterError

METRIC_CODES = {
    "l2": kernels.METRIC_L2,
    "ip": kernels.METRIC_IP,
    "cosine": kernels.METRIC_COSINE,
}


@dataclass
class IndexParams:
    """Build-time knobs for a layered graph.

    Args:
        M: Maximum out-degree at layers >= 1 (also the link count chosen for
            a new point at every layer).
        M_max0: Maximum out-degree at layer 0. Defaults to 2 * M.
        ef_construction: Beam width used while linking a point.
        metric: "l2" (squared euclidean), "ip" (1 - dot) or "cosine".
        level_lambda: Level-assignment normalization. Defaults to 1 / ln(M),
            which puts an expected fraction 1/M of points above layer 0.
        rng_seed: Seed for the level-assignment generator; fixed seeds give
            bit-reproducible single-threaded construction.
    """

    M: int = 16
    M_max0: int | None = None
    ef_construction: int = 200
    metric: str = "l2"
    level_lambda: float | None = None
    rng_seed: int = 0

    def __post_init__(self):
        if self.M_max0 is None:
            self.M_max0 = 2 * self.M
        if self.level_lambda is None and self.M >= 2:
            self.level_lambda = 1.0 / math.log(self.M)
        self.validate()

    def validate(self):
        if self.M < 2:
            raise ParameterError(f"M must be >= 2, got {self.M}")
        if self.M_max0 < self.M:
            raise ParameterError(
                f"M_max0 must be >= M, got M_max0={self.M_max0} M={self.M}")
        if self.ef_construction < self.M:
            raise ParameterError(
                f"ef_construction must be >= M, got {self.ef_construction}")
        if self.metric not in METRIC_CODES:
            raise ParameterError(
                f"unknown metric {self.metric!r}; expected one of "
                f"{sorted(METRIC_CODES)}")
        if self.level_lambda <= 0:
            raise ParameterError("level_lambda must be positive")

    @property
    def metric_code(self) -> int:
        return METRIC_CODES[self.metric]


def distance(a, b, metric: str = "l2") -> float:
    """Distance between two vectors under the given metric tag.

    "l2" returns the *squared* euclidean distance, which is order-preserving
    for nearest-neighbor ranking; tests and callers should compare ranks, not
    raw values, when mixing with true euclidean distances.
    """
    if metric not in METRIC_CODES:
        raise ParameterError(f"unknown metric {metric!r}")
    a = np.ascontiguousarray(a, dtype=np.float32)
    b = np.ascontiguousarray(b, dtype=np.float32)
    if a.ndim != 1 or b.ndim != 1 or a.shape[0] != b.shape[0]:
        raise DimensionMismatch(
            f"expected equal-length 1-d vectors, got shapes {a.shape} and {b.shape}")
    return float(kernels.distance_kernel(METRIC_CODES[metric], a, b))


def draw_level(rng: np.random.Generator, level_lambda: float) -> int:
    """Sample a top layer: floor(-ln(u) * level_lambda), u uniform in (0, 1]."""
    u = 1.0 - rng.random()
    return int(-math.log(u) * level_lambda)


class LayeredGraph:
    """Multi-layer directed proximity graph with slot-based node storage.

    The constructor builds an empty index: ``entry_point`` is -1 until the
    first insertion. ``capacity`` bounds the number of slots ever allocated;
    replacement insertions reuse slots of deleted points instead of
    allocating.
    """

    def __init__(self, params: IndexParams, dim: int, capacity: int):
        params.validate()
        if dim < 1:
            raise ParameterError(f"dim must be >= 1, got {dim}")
        if capacity < 1:
            raise ParameterError(f"capacity must be >= 1, got {capacity}")
        self.params = params
        self.dim = int(dim)
        self.capacity = int(capacity)

        self.vectors = np.zeros((capacity, dim), dtype=np.float32)
        self.labels = np.full(capacity, -1, dtype=np.int64)
        self.levels = np.zeros(capacity, dtype=np.int32)
        self.deleted = np.zeros(capacity, dtype=np.bool_)

        self.size = 0  # allocated slots
        self.entry_point = -1
        self.max_layer = -1
        self.deleted_list: deque[int] = deque()
        self.label_index: dict[int, int] = {}

        self._adj: list[np.ndarray] = []  # per layer: (capacity, bound) int32
        self._adj_cnt: list[np.ndarray] = []  # per layer: (capacity,) int32
        self._live = 0
        self._rng = np.random.default_rng(params.rng_seed)
        self.write_lock = threading.RLock()

    # -- bookkeeping -------------------------------------------------------

    @property
    def live_count(self) -> int:
        """Number of allocated slots whose deleted flag is clear."""
        return self._live

    @property
    def n_layers(self) -> int:
        return len(self._adj)

    def layer_bound(self, layer: int) -> int:
        return self.params.M_max0 if layer == 0 else self.params.M

    def is_live(self, label: int) -> bool:
        slot = self.label_index.get(label)
        return slot is not None and not self.deleted[slot]

    def live_labels(self) -> np.ndarray:
        mask = ~self.deleted[:self.size]
        return np.sort(self.labels[:self.size][mask])

    def check_vector(self, vector) -> np.ndarray:
        v = np.ascontiguousarray(vector, dtype=np.float32)
        if v.ndim != 1 or v.shape[0] != self.dim:
            raise DimensionMismatch(
                f"expected a vector of dimension {self.dim}, got shape {v.shape}")
        return v

    @staticmethod
    def check_label(label) -> int:
        label = int(label)
        if label < 0:
            raise InputError(f"labels must be non-negative, got {label}")
        return label

    def draw_level(self) -> int:
        return draw_level(self._rng, self.params.level_lambda)

    def ensure_layers(self, level: int):
        while len(self._adj) <= level:
            layer = len(self._adj)
            bound = self.layer_bound(layer)
            self._adj.append(np.zeros((self.capacity, bound), dtype=np.int32))
            self._adj_cnt.append(np.zeros(self.capacity, dtype=np.int32))

    def neighbors(self, slot: int, layer: int) -> np.ndarray:
        """Copy of the slot's out-neighbor list at a layer (empty if none)."""
        if layer >= len(self._adj):
            return np.empty(0, dtype=np.int32)
        cnt = self._adj_cnt[layer][slot]
        return self._adj[layer][slot, :cnt].copy()

    def set_neighbors(self, slot: int, layer: int, neighbor_slots):
        bound = self.layer_bound(layer)
        n = len(neighbor_slots)
        if n > bound:
            raise InputError(
                f"{n} neighbors exceed the bound {bound} at layer {layer}")
        self._adj[layer][slot, :n] = neighbor_slots
        self._adj_cnt[layer][slot] = n

    def has_edge(self, src: int, dst: int, layer: int) -> bool:
        if layer >= len(self._adj):
            return False
        cnt = self._adj_cnt[layer][src]
        return bool((self._adj[layer][src, :cnt] == dst).any())

    def _claim_label(self, label: int, slot: int):
        # A deleted label may be reinserted before the slot that held it is
        # reused; the tombstone then loses its label claim (it stays queued
        # for reuse, just anonymous).
        existing = self.label_index.get(label)
        if existing is not None and existing != slot:
            self.labels[existing] = -1
        self.label_index[label] = slot
        self.labels[slot] = label

    def allocate(self, vector: np.ndarray, label: int, level: int) -> int:
        """Claim the next free slot; callers validate label uniqueness."""
        slot = self.size
        self.size += 1
        self.vectors[slot] = vector
        self.levels[slot] = level
        self.deleted[slot] = False
        self._claim_label(label, slot)
        self.ensure_layers(level)
        self._live += 1
        return slot

    def install(self, slot: int, vector: np.ndarray, label: int):
        """Overwrite a deleted slot with a new point's data (level is kept)."""
        old = int(self.labels[slot])
        if old >= 0:
            self.label_index.pop(old, None)
        self._claim_label(label, slot)
        self.vectors[slot] = vector
        self.deleted[slot] = False
        self._live += 1


# ---------------------------------------------------------------------------
# Structural audit.
# ---------------------------------------------------------------------------


@dataclass
class StructureReport:
    """Findings of a full structural scan; empty lists mean a healthy graph."""

    degree_violations: list = field(default_factory=list)  # (slot, layer, count, bound)
    self_edges: list = field(default_factory=list)  # (slot, layer)
    dangling_edges: list = field(default_factory=list)  # (slot, layer, target)
    adjacency_above_level: list = field(default_factory=list)  # (slot, layer)
    entry_point_issues: list = field(default_factory=list)
    label_index_issues: list = field(default_factory=list)
    deleted_list_issues: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.degree_violations or self.self_edges
                    or self.dangling_edges or self.adjacency_above_level
                    or self.entry_point_issues or self.label_index_issues
                    or self.deleted_list_issues)

    def summary(self) -> str:
        if self.ok:
            return "structure ok"
        parts = []
        for name in ("degree_violations", "self_edges", "dangling_edges",
                     "adjacency_above_level", "entry_point_issues",
                     "label_index_issues", "deleted_list_issues"):
            items = getattr(self, name)
            if items:
                parts.append(f"{name}={len(items)}")
        return "structure FAILED: " + ", ".join(parts)


def audit_structure(g: LayeredGraph) -> StructureReport:
    """Scan every invariant the graph is supposed to keep.

    Requires a quiescent index (no concurrent writers).
    """
    report = StructureReport()
    for layer in range(g.n_layers):
        adj = g._adj[layer]
        cnt = g._adj_cnt[layer]
        bound = g.layer_bound(layer)
        for slot in range(g.size):
            c = int(cnt[slot])
            if c > bound:
                report.degree_violations.append((slot, layer, c, bound))
            if c > 0 and layer > g.levels[slot]:
                report.adjacency_above_level.append((slot, layer))
            row = adj[slot, :c]
            for t in row:
                t = int(t)
                if t == slot:
                    report.self_edges.append((slot, layer))
                if t < 0 or t >= g.size or g.levels[t] < layer:
                    report.dangling_edges.append((slot, layer, t))

    if (g.size == 0) != (g.entry_point < 0):
        report.entry_point_issues.append(
            f"entry_point={g.entry_point} with {g.size} allocated slots")
    if g.entry_point >= 0:
        if g.levels[g.entry_point] != g.max_layer:
            report.entry_point_issues.append(
                f"entry level {g.levels[g.entry_point]} != max_layer {g.max_layer}")
        actual_max = int(g.levels[:g.size].max()) if g.size else -1
        if actual_max != g.max_layer:
            report.entry_point_issues.append(
                f"max_layer {g.max_layer} != max slot level {actual_max}")

    for label, slot in g.label_index.items():
        if slot < 0 or slot >= g.size or int(g.labels[slot]) != label:
            report.label_index_issues.append(
                f"label {label} maps to slot {slot} holding "
                f"{g.labels[slot] if 0 <= slot < g.size else 'nothing'}")
    for slot in range(g.size):
        lbl = int(g.labels[slot])
        if lbl < 0:
            # only tombstones whose label was reinserted elsewhere may be
            # anonymous
            if not g.deleted[slot]:
                report.label_index_issues.append(
                    f"live slot {slot} has no label")
        elif g.label_index.get(lbl) != slot:
            report.label_index_issues.append(
                f"slot {slot} label {lbl} missing from label_index")

    flagged = {s for s in range(g.size) if g.deleted[s]}
    queued = list(g.deleted_list)
    if len(queued) != len(set(queued)):
        report.deleted_list_issues.append("deleted_list contains duplicates")
    if set(queued) != flagged:
        report.deleted_list_issues.append(
            f"deleted_list {sorted(set(queued))} != flagged slots {sorted(flagged)}")
    return report
