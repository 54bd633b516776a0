"""Exact ground truth and recall evaluation for index results."""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, InputError, ParameterError
from .graph import METRIC_CODES
from .search import SearchResult


def _distance_matrix(base: np.ndarray, queries: np.ndarray, metric: str) -> np.ndarray:
    b = base.astype(np.float64)
    q = queries.astype(np.float64)
    if metric == "l2":
        bb = (b * b).sum(axis=1)
        qq = (q * q).sum(axis=1)
        return qq[:, None] - 2.0 * (q @ b.T) + bb[None, :]
    if metric == "ip":
        return 1.0 - q @ b.T
    # cosine: zero-norm rows get similarity 0 (distance 1)
    bn = np.linalg.norm(b, axis=1)
    qn = np.linalg.norm(q, axis=1)
    sim = q @ b.T
    denom = qn[:, None] * bn[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        sim = np.where(denom > 0, sim / denom, 0.0)
    return 1.0 - sim


def brute_force_gt(base, queries, k: int, metric: str = "l2",
                   labels=None) -> np.ndarray:
    """Exact k nearest labels per query by full scan.

    Ties on distance are broken by ascending label. ``labels`` defaults to
    positions 0..n-1. Returns an (n_queries, k) int64 array.
    """
    if metric not in METRIC_CODES:
        raise ParameterError(f"unknown metric {metric!r}")
    base = np.atleast_2d(np.asarray(base, dtype=np.float32))
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float32))
    if base.shape[1] != queries.shape[1]:
        raise DimensionMismatch(
            f"base dimension {base.shape[1]} != query dimension {queries.shape[1]}")
    n = base.shape[0]
    if k < 1 or k > n:
        raise InputError(f"k must be in 1..{n}, got {k}")
    if labels is None:
        labels = np.arange(n, dtype=np.int64)
    else:
        labels = np.asarray(labels, dtype=np.int64)
        if labels.shape[0] != n:
            raise InputError("labels must match the base row count")

    out = np.empty((queries.shape[0], k), dtype=np.int64)
    chunk = max(1, int(2e7) // max(n, 1))
    for start in range(0, queries.shape[0], chunk):
        dist = _distance_matrix(base, queries[start:start + chunk], metric)
        for i in range(dist.shape[0]):
            order = np.lexsort((labels, dist[i]))[:k]
            out[start + i] = labels[order]
    return out


def recall_at_k(result, gt, k: int) -> float:
    """Fraction of the first k ground-truth labels present in the first k
    result labels.

    ``result`` is a :class:`SearchResult` or a sequence of labels. Results
    shorter than k are penalized: the denominator stays k.
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    got = result.labels if isinstance(result, SearchResult) else list(result)
    gt = list(np.asarray(gt).ravel())
    if len(gt) < k:
        raise InputError(f"ground truth holds {len(gt)} labels, need {k}")
    return len(set(got[:k]) & set(int(x) for x in gt[:k])) / k
