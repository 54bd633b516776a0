"""Scikit-learn compatible front end for the index.

``HnswNeighbors`` follows the fit/kneighbors/transform surface of
``sklearn.neighbors`` so the index drops into pipelines and neighbor-graph
consumers, while exposing the dynamic operations (mark_deleted, replace) the
underlying structure was built for. Returned distances are in the metric's
conventional scale (true euclidean for "l2"), unlike the squared values the
low-level API reports.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .dual import DualIndex
from .graph import IndexParams, LayeredGraph, audit_structure
from .reachability import reachability_report
from .search import insert, knn_search
from .updates import UpdateStrategy, mark_delete, replace_update


class HnswNeighbors(BaseEstimator, TransformerMixin):
    """Approximate nearest-neighbor index with live delete/replace support.

    Parameters
    ----------
    n_neighbors : int, default=5
        Neighbors returned by :meth:`kneighbors` and :meth:`transform`.
    M : int, default=16
        Maximum out-degree at layers >= 1.
    M_max0 : int or None, default=None
        Maximum out-degree at layer 0; defaults to 2 * M.
    ef_construction : int, default=200
        Beam width while linking points.
    ef : int, default=100
        Query beam width; clamped to at least the requested neighbor count.
    metric : {"l2", "ip", "cosine"}, default="l2"
    update_strategy : str, default="mn-ru-gamma"
        Replacement-insertion strategy for :meth:`replace`.
    alpha : float or None, default=None
        Occlusion factor override for the update strategy.
    dual_index : bool, default=False
        Maintain a backup index over stranded points and merge it into
        queries.
    rebuild_threshold : int, default=40000
        Replacement count that triggers a backup rebuild.
    capacity_margin : float, default=1.0
        Slot capacity as a multiple of the fitted sample count; headroom for
        growth via :meth:`replace` on fresh labels after deletions.
    random_state : int or None, default=0
        Seed for level assignment; None draws a fresh seed.
    """

    def __init__(self, n_neighbors=5, M=16, M_max0=None, ef_construction=200,
                 ef=100, metric="l2", update_strategy="mn-ru-gamma",
                 alpha=None, dual_index=False, rebuild_threshold=40_000,
                 capacity_margin=1.0, random_state=0):
        self.n_neighbors = n_neighbors
        self.M = M
        self.M_max0 = M_max0
        self.ef_construction = ef_construction
        self.ef = ef
        self.metric = metric
        self.update_strategy = update_strategy
        self.alpha = alpha
        self.dual_index = dual_index
        self.rebuild_threshold = rebuild_threshold
        self.capacity_margin = capacity_margin
        self.random_state = random_state

    # -- sklearn surface ----------------------------------------------------

    def fit(self, X, y=None):
        """Build the index over X; row i is addressable as label i."""
        X = check_array(X, dtype=np.float32, order="C")
        seed = self.random_state
        if seed is None:
            seed = int(np.random.SeedSequence().entropy % (2**63))
        params = IndexParams(M=self.M, M_max0=self.M_max0,
                             ef_construction=self.ef_construction,
                             metric=self.metric, rng_seed=seed)
        capacity = max(1, int(round(len(X) * max(self.capacity_margin, 1.0))))
        index = LayeredGraph(params, X.shape[1], capacity)
        for i, row in enumerate(X):
            insert(index, row, i)
        self.index_ = index
        self.dual_ = DualIndex(index, self.rebuild_threshold) if self.dual_index else None
        self.strategy_ = UpdateStrategy.from_name(self.update_strategy, self.alpha)
        self.n_features_in_ = X.shape[1]
        self.n_samples_fit_ = len(X)
        self._next_label = len(X)
        return self

    def _effective_ef(self, k: int) -> int:
        return max(self.ef, k)

    def _from_native(self, dist: float) -> float:
        return float(np.sqrt(dist)) if self.metric == "l2" else float(dist)

    def _query_one(self, q, k):
        if self.dual_ is not None:
            return self.dual_.dual_search(q, k, self._effective_ef(k))
        return knn_search(self.index_, q, k, self._effective_ef(k))

    def kneighbors(self, X=None, n_neighbors=None, return_distance=True):
        """Labels (and distances) of the nearest live points per query row.

        With X=None, queries the fitted points themselves and excludes each
        point's own label from its result.
        """
        check_is_fitted(self, "index_")
        k = n_neighbors or self.n_neighbors
        self_query = X is None
        if self_query:
            live = self.index_.live_labels()
            X = np.stack([self.index_.vectors[self.index_.label_index[int(l)]]
                          for l in live])
            own = list(int(l) for l in live)
        X = check_array(X, dtype=np.float32, order="C")
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        ind = np.full((len(X), k), -1, dtype=np.int64)
        dist = np.full((len(X), k), np.inf, dtype=np.float64)
        for i, q in enumerate(X):
            res = self._query_one(q, k + 1 if self_query else k)
            entries = [(lbl, d) for lbl, d in res
                       if not (self_query and lbl == own[i])][:k]
            for j, (lbl, d) in enumerate(entries):
                ind[i, j] = lbl
                dist[i, j] = self._from_native(d)
        if return_distance:
            return dist, ind
        return ind

    def transform(self, X):
        """Sparse (n_queries, n_samples_fit) matrix of neighbor distances."""
        check_is_fitted(self, "index_")
        dist, ind = self.kneighbors(X)
        n = len(dist)
        rows, cols, vals = [], [], []
        for i in range(n):
            for j in range(dist.shape[1]):
                if ind[i, j] >= 0:
                    rows.append(i)
                    cols.append(int(ind[i, j]))
                    vals.append(dist[i, j])
        width = max(self.n_samples_fit_, self._next_label)
        return csr_matrix((vals, (rows, cols)), shape=(n, width))

    # -- dynamic index operations --------------------------------------------

    def mark_deleted(self, labels):
        """Tombstone the given labels; their slots await replacement."""
        check_is_fitted(self, "index_")
        for lbl in np.atleast_1d(labels):
            mark_delete(self.index_, int(lbl))
        return self

    def replace(self, X, labels=None):
        """Insert rows, reusing tombstoned slots via the update strategy.

        Returns the labels assigned to the rows (fresh ones when ``labels``
        is None).
        """
        check_is_fitted(self, "index_")
        X = check_array(X, dtype=np.float32, order="C")
        if labels is None:
            labels = list(range(self._next_label, self._next_label + len(X)))
        labels = [int(l) for l in np.atleast_1d(labels)]
        for row, lbl in zip(X, labels):
            if self.dual_ is not None:
                self.dual_.replace_update(row, lbl, self.strategy_)
            else:
                replace_update(self.index_, row, lbl, self.strategy_)
        self._next_label = max(self._next_label, max(labels) + 1)
        return labels

    def reachability_report(self):
        check_is_fitted(self, "index_")
        return reachability_report(self.index_)

    def structure_report(self):
        check_is_fitted(self, "index_")
        return audit_structure(self.index_)
