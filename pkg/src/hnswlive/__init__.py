"""In-memory HNSW index with real-time deletion and replacement insertion,
unreachable-point auditing, and a backup-index/dual-search recovery path."""

from .dual import DEFAULT_TAU, DualIndex
from .errors import (AlreadyDeleted, CapacityError, ConfigError,
                     DimensionMismatch, DuplicateLabel, EmptyIndexError,
                     FormatError, HnswError, InputError, InvalidState,
                     ParameterError, UnknownLabel)
from .estimator import HnswNeighbors
from .graph import (IndexParams, LayeredGraph, StructureReport,
                    audit_structure, distance, draw_level)
from .io import (load_fvecs, load_index, load_ivecs, save_fvecs, save_index,
                 save_ivecs, synthetic_vectors)
from .metrics import brute_force_gt, recall_at_k
from .reachability import (ReachabilityReport, count_indegree_zero,
                           reachability_report, traversal_reachable,
                           unreachable_by_search)
from .scenarios import (CSV_HEADER, MetricsRecord, ScenarioConfig,
                        ScenarioResult, metrics_to_csv, run_scenario)
from .search import SearchResult, insert, knn_search, search_layer, select_neighbors
from .updates import (RepairPlan, StrategyKind, UpdateStrategy,
                      hnsw_ru_insert, mark_delete, mn_repair,
                      mn_update_insert, replace_update)

__version__ = "0.1.0"

__all__ = [
    "AlreadyDeleted", "CapacityError", "ConfigError", "CSV_HEADER",
    "DEFAULT_TAU", "DimensionMismatch", "DualIndex", "DuplicateLabel",
    "EmptyIndexError", "FormatError", "HnswError", "HnswNeighbors",
    "IndexParams", "InputError", "InvalidState", "LayeredGraph",
    "MetricsRecord", "ParameterError", "ReachabilityReport", "RepairPlan",
    "ScenarioConfig", "ScenarioResult", "SearchResult", "StrategyKind",
    "StructureReport", "UnknownLabel", "UpdateStrategy", "audit_structure",
    "brute_force_gt", "count_indegree_zero", "distance", "draw_level",
    "hnsw_ru_insert", "insert", "knn_search", "load_fvecs", "load_index",
    "load_ivecs", "mark_delete", "metrics_to_csv", "mn_repair",
    "mn_update_insert", "reachability_report", "recall_at_k",
    "replace_update", "run_scenario", "save_fvecs", "save_index",
    "save_ivecs", "search_layer", "select_neighbors", "synthetic_vectors",
    "traversal_reachable", "unreachable_by_search",
]
