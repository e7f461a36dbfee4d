"""Exact top-K maximal k-biplex search in bipartite graphs.

A k-biplex is an induced bipartite subgraph in which every vertex is
adjacent to all but at most k vertices of the opposite side. This package
finds the K maximal k-biplexes with the most edges, subject to per-side
size thresholds, using branch-and-bound kernels (`basic_bb`, `fast_bb`)
optionally wrapped in progressive-bounding and decomposition frameworks
(`pb_run`, `ie_run`, `pbie_run`), plus a brute-force oracle for small
graphs (`enumerate_all_mbps`).
"""
from .biplexes import (
    Branch,
    FoundBiplex,
    PruneReason,
    ResultPool,
    SearchParams,
    is_connected,
    is_k_biplex,
    is_maximal,
    offer_result,
    should_prune,
    tau_bounds,
)
from .frameworks import (
    FRAMEWORKS,
    KERNELS,
    PBStep,
    Subproblem,
    ie_decompose,
    ie_order,
    ie_run,
    pb_run,
    pb_schedule,
    pbie_run,
    run_search,
    window_lb_r,
)
from .graph import (
    BipartiteGraph,
    InducedSubgraph,
    LabeledGraph,
    ParseError,
    Side,
    VertexRef,
    ab_core,
    generate_er,
    load_edge_list,
    max_degree,
    two_hop_left,
)
from .oracle import (
    MAX_ORACLE_VERTICES,
    OracleResult,
    OracleSizeError,
    enumerate_all_mbps,
)
from .search import (
    PivotChoice,
    SearchStats,
    SearchTimeout,
    basic_bb,
    bk_children,
    build_ordering,
    candidate_ordering,
    fast_bb,
    gamma_k,
    refine_branch,
    select_pivot,
    sym_bk_children,
)

__version__ = "0.1.0"

__all__ = [
    "BipartiteGraph",
    "Branch",
    "FoundBiplex",
    "FRAMEWORKS",
    "InducedSubgraph",
    "KERNELS",
    "LabeledGraph",
    "MAX_ORACLE_VERTICES",
    "OracleResult",
    "OracleSizeError",
    "ParseError",
    "PBStep",
    "PivotChoice",
    "PruneReason",
    "ResultPool",
    "SearchParams",
    "SearchStats",
    "SearchTimeout",
    "Side",
    "Subproblem",
    "VertexRef",
    "ab_core",
    "basic_bb",
    "bk_children",
    "build_ordering",
    "candidate_ordering",
    "enumerate_all_mbps",
    "fast_bb",
    "gamma_k",
    "generate_er",
    "ie_decompose",
    "ie_order",
    "ie_run",
    "is_connected",
    "is_k_biplex",
    "is_maximal",
    "load_edge_list",
    "max_degree",
    "offer_result",
    "pb_run",
    "pb_schedule",
    "pbie_run",
    "refine_branch",
    "run_search",
    "select_pivot",
    "should_prune",
    "sym_bk_children",
    "tau_bounds",
    "two_hop_left",
    "window_lb_r",
]
