"""Backup index over stranded points, queried in parallel with the main one.

The backup is rebuilt from scratch over the search-unreachable set whenever
the number of replacement insertions since the last rebuild exceeds the
threshold ``tau``; in between it goes stale by design (points stranded after
the last rebuild stay invisible until the next one, and points replaced or
re-deleted since are filtered out of merged results at query time rather
than purged).
"""

from __future__ import annotations

import logging

from .errors import ParameterError
from .graph import IndexParams, LayeredGraph
from .reachability import unreachable_by_search
from .search import SearchResult, insert, knn_search
from .updates import UpdateStrategy, replace_update

logger = logging.getLogger(__name__)

DEFAULT_TAU = 40_000


class DualIndex:
    """A main index plus a backup index of its unreachable points.

    Args:
        main: The index serving normal traffic.
        tau: Rebuild threshold; the backup is reconstructed when the number
            of replacement insertions since the last rebuild exceeds it.
        backup_params: Build parameters for the backup; defaults to the
            main index's parameters.

    Readers may query both indexes concurrently; ``build_backup`` needs the
    writer-exclusive discipline on the main index and swaps the backup in a
    single reference assignment, so readers see the old or the new backup,
    never a partial one.
    """

    def __init__(self, main: LayeredGraph, tau: int = DEFAULT_TAU,
                 backup_params: IndexParams | None = None):
        if tau < 1:
            raise ParameterError(f"tau must be >= 1, got {tau}")
        self.main = main
        self.tau = int(tau)
        self.backup_params = backup_params
        self.backup: LayeredGraph | None = None
        self.ops_since_rebuild = 0
        self.total_ops = 0
        self.rebuild_log: list[tuple[int, int]] = []  # (total_ops, |U|)

    def build_backup(self):
        """Rebuild the backup from scratch over the current search-unreachable
        set of the main index and reset the operation counter."""
        unreachable = sorted(unreachable_by_search(self.main))
        params = self.backup_params or self.main.params
        backup = LayeredGraph(params, self.main.dim,
                              capacity=max(len(unreachable), 1))
        for label in unreachable:
            slot = self.main.label_index[label]
            insert(backup, self.main.vectors[slot], label)
        self.backup = backup
        self.ops_since_rebuild = 0
        self.rebuild_log.append((self.total_ops, len(unreachable)))
        logger.info("backup rebuilt after %d ops: %d unreachable points",
                    self.total_ops, len(unreachable))

    def record_update(self) -> bool:
        """Count one replacement insertion; rebuild when the count exceeds
        tau. Returns whether a rebuild was triggered."""
        self.ops_since_rebuild += 1
        self.total_ops += 1
        if self.ops_since_rebuild > self.tau:
            self.build_backup()
            return True
        return False

    def replace_update(self, vector, label: int, strategy: UpdateStrategy) -> int:
        """Replacement insertion on the main index plus maintenance tick."""
        slot = replace_update(self.main, vector, label, strategy)
        self.record_update()
        return slot

    def dual_search(self, query, k: int, ef: int) -> SearchResult:
        """k-NN over both indexes, merged.

        Results are unioned with label-keyed de-duplication, filtered to
        labels still live in the main index (the backup may hold ghosts of
        points replaced or deleted since its last rebuild), sorted ascending
        by (distance, label), and truncated to k.
        """
        r_main = knn_search(self.main, query, k, ef)
        merged = dict(r_main.entries)
        if self.backup is not None and self.backup.live_count > 0:
            for lbl, dist in knn_search(self.backup, query, k, ef).entries:
                if not self.main.is_live(lbl):
                    continue
                if lbl not in merged:
                    merged[lbl] = dist
        ranked = sorted(merged.items(), key=lambda e: (e[1], e[0]))[:k]
        return SearchResult(ranked)
