"""Boosting frameworks wrapped around the search kernels.

Three orthogonal strategies, all exact:

* progressive bounding (`pb_run`): narrows the feasible left-side size from
  above in halving windows, shrinking the graph to a degree core per window
  and capping partial-set sizes inside the kernel;
* seeded decomposition (`ie_run`): one subproblem per left vertex over its
  two-hop neighborhood, with earlier seeds excluded so each result is found
  exactly once;
* both combined (`pbie_run`): per window, decompose the window's core.

Any framework can drive either kernel; the shared result pool makes their
final top-K identical to a plain kernel run.
"""
from __future__ import annotations

import heapq
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Iterator, Optional, Sequence, Union

from .biplexes import Branch, ResultPool, SearchParams, offer_result
from .graph import (
    BipartiteGraph,
    InducedSubgraph,
    Side,
    ab_core,
    bits_of,
    max_degree,
    two_hop_left,
)
from .search import Origin, SearchStats, basic_bb, fast_bb

Kernel = Callable[..., SearchStats]

KERNELS: dict[str, Kernel] = {"basic": basic_bb, "fast": fast_bb}


def resolve_kernel(kernel: Union[str, Kernel]) -> Kernel:
    if callable(kernel):
        return kernel
    try:
        return KERNELS[kernel]
    except KeyError:
        raise ValueError(f"unknown kernel {kernel!r}; expected one of {sorted(KERNELS)}")


def _ceil_div(num: int, den: int) -> int:
    return -(-num // den)


@dataclass(frozen=True)
class PBStep:
    """One progressive-bounding window over the left-side size.

    Any result relevant to this window has between lb_l and ub_l left
    vertices; ub_r caps the right side globally. The right-side lower bound
    is not stored because it depends on the pool's K-th edge count at the
    moment the window starts; see `window_lb_r`.
    """

    index: int
    lb_l: int
    ub_l: int
    ub_r: int


def window_lb_r(kth_edge_count: int, ub_l: int, theta_r: int) -> int:
    """Smallest right side a result must have to beat the pool's K-th entry.

    Fewer than ceil(kth / ub_l) right vertices cannot reach kth+1 edges when
    the left side is capped at ub_l; never drops below theta_r.
    """
    return max(_ceil_div(kth_edge_count, ub_l), theta_r)


def pb_schedule(graph: BipartiteGraph, params: SearchParams) -> Iterator[PBStep]:
    """Yields halving windows on the left-side size, largest first.

    The first upper bound is the largest right degree plus k (no result's
    left side can exceed it); each window's lower bound becomes the next
    window's upper bound until the lower bound reaches theta_l. The first
    window is emitted even when it is the degenerate [theta_l, theta_l]:
    stopping before it would lose results whose left side is exactly
    theta_l. Yields nothing when either side provably cannot reach its
    threshold.
    """
    lb = max_degree(graph, Side.RIGHT) + params.k
    if lb < params.theta_l:
        return
    if max_degree(graph, Side.LEFT) + params.k < params.theta_r:
        return
    ub_r = max_degree(graph, Side.LEFT) + params.k
    index = 0
    while True:
        index += 1
        ub = lb
        lb = max(_ceil_div(ub, 2), params.theta_l)
        yield PBStep(index=index, lb_l=lb, ub_l=ub, ub_r=ub_r)
        if lb <= params.theta_l:
            return


@dataclass(frozen=True)
class Subproblem:
    """A seeded search restricted to one vertex's two-hop neighborhood.

    The seed must be part of every result; `excluded_left` vertices (seeds
    of earlier subproblems that survived inside this subgraph) must not be.
    By construction the subgraph never contains earlier seeds, so the set
    is normally empty, but the kernel honors it regardless.
    """

    induced: InducedSubgraph
    seed_left: int
    excluded_left: frozenset[int]
    after_pruning_left: int
    after_pruning_right: int


def ie_order(graph: BipartiteGraph) -> list[int]:
    """Seed order for the decomposition: ascending degree, ties by index."""
    return sorted(range(graph.left_count), key=lambda v: (graph.degree(Side.LEFT, v), v))


def ie_decompose(
    graph: BipartiteGraph,
    params: SearchParams,
    *,
    min_l: Optional[int] = None,
    min_r: Optional[int] = None,
    order: Optional[list[int]] = None,
) -> Iterator[Subproblem]:
    """Splits the search into one subproblem per left vertex.

    Subproblem i spans the seed's two-hop left neighborhood minus all
    earlier seeds, plus every right neighbor of that left set. Vertices
    that cannot sit in a result of the required size alongside the seed are
    peeled to a fixpoint: a left vertex needs min_r - k right neighbors
    here and min_r - 2k of them shared with the seed (vacuous when
    min_r <= 2k); a right vertex needs min_l - k left neighbors. Subproblems
    whose seed or side sizes fail are skipped entirely.

    min_l / min_r default to the size thresholds; progressive bounding
    passes its window bounds instead.
    """
    lo_l = params.theta_l if min_l is None else min_l
    lo_r = params.theta_r if min_r is None else min_r
    k = params.k
    need_right_deg = lo_r - k
    need_common = lo_r - 2 * k
    need_left_deg = lo_l - k
    seeds = ie_order(graph) if order is None else order
    seen: set[int] = set()
    for seed in seeds:
        left = set(two_hop_left(graph, seed)) - seen
        seen.add(seed)
        if seed not in left:
            continue
        right: set[int] = set()
        for v in left:
            right.update(graph.adj_left[v])
        seed_nbrs = graph.nbr_sets_left[seed]

        changed = True
        seed_ok = True
        while changed:
            changed = False
            for v in list(left):
                if v == seed:
                    continue
                nbrs_here = graph.nbr_sets_left[v] & right
                if len(nbrs_here) < need_right_deg or (
                    need_common > 0 and len(nbrs_here & seed_nbrs) < need_common
                ):
                    left.remove(v)
                    changed = True
            for u in list(right):
                if len(graph.nbr_sets_right[u] & left) < need_left_deg:
                    right.remove(u)
                    changed = True
            if len(graph.nbr_sets_left[seed] & right) < need_right_deg:
                seed_ok = False
                break
        if not seed_ok:
            continue
        if len(left) < lo_l or len(right) < lo_r:
            continue
        yield Subproblem(
            induced=graph.induce(left, right),
            seed_left=seed,
            excluded_left=frozenset((seen - {seed}) & left),
            after_pruning_left=len(left),
            after_pruning_right=len(right),
        )


def _compose_origin(
    outer: Optional[Origin],
    graph: BipartiteGraph,
    left_map: tuple[int, ...],
    right_map: tuple[int, ...],
) -> Origin:
    if outer is None:
        return (graph, left_map, right_map)
    base, outer_left, outer_right = outer
    return (
        base,
        tuple(outer_left[v] for v in left_map),
        tuple(outer_right[u] for u in right_map),
    )


def _run_subproblem(
    graph: BipartiteGraph,
    params: SearchParams,
    pool: ResultPool,
    sub: Subproblem,
    kernel: Kernel,
    deadline: Optional[float],
    base_origin: Optional[Origin] = None,
) -> SearchStats:
    compact, left_map, right_map = sub.induced.compact()
    left_pos = {v: i for i, v in enumerate(left_map)}
    start = Branch.seeded(
        compact,
        params.k,
        s_left={left_pos[sub.seed_left]},
        d_left={left_pos[v] for v in sub.excluded_left},
    )
    origin = _compose_origin(base_origin, graph, left_map, right_map)
    return kernel(compact, params, pool, start, origin=origin, deadline=deadline)


def _dispatch(
    tasks: list,
    runner: Callable,
    stats: SearchStats,
    workers: int,
) -> None:
    """Runs subproblem tasks, possibly on worker threads, merging stats.

    Offers are serialized inside the pool, so workers only need their own
    stats objects, merged here on completion.
    """
    if workers <= 1 or len(tasks) <= 1:
        for task in tasks:
            stats.merge(runner(task))
        return
    with ThreadPoolExecutor(max_workers=workers) as executor:
        for result in executor.map(runner, tasks):
            stats.merge(result)


def _require_connectivity(params: SearchParams, framework: str) -> None:
    if not params.meets_connectivity_thresholds:
        raise ValueError(
            f"{framework} requires both size thresholds >= 2k+1 "
            f"(k={params.k}, theta_l={params.theta_l}, theta_r={params.theta_r}); "
            "its decomposition is only exact in that regime"
        )


def pb_run(
    graph: BipartiteGraph,
    params: SearchParams,
    pool: ResultPool,
    kernel: Union[str, Kernel] = "fast",
    *,
    deadline: Optional[float] = None,
) -> SearchStats:
    """Runs the kernel once per bounding window on that window's core.

    Exact for any thresholds: every window prunes only branches whose
    results either belong to other windows or cannot beat the pool.
    """
    kern = resolve_kernel(kernel)
    stats = SearchStats()
    t0 = time.perf_counter()
    for step in pb_schedule(graph, params):
        lb_r = window_lb_r(pool.kth_edge_count, step.ub_l, params.theta_r)
        core = ab_core(graph, max(lb_r - params.k, 0), max(step.lb_l - params.k, 0))
        if core.is_empty:
            continue
        compact, left_map, right_map = core.compact()
        step_params = replace(params, ub_l=step.ub_l, ub_r=step.ub_r)
        kern(
            compact,
            step_params,
            pool,
            origin=(graph, left_map, right_map),
            deadline=deadline,
            stats=stats,
        )
    stats.elapsed_ms = (time.perf_counter() - t0) * 1000.0
    return stats


def ie_run(
    graph: BipartiteGraph,
    params: SearchParams,
    pool: ResultPool,
    kernel: Union[str, Kernel] = "fast",
    *,
    workers: int = 1,
    deadline: Optional[float] = None,
) -> SearchStats:
    """Runs one seeded kernel search per decomposition subproblem."""
    _require_connectivity(params, "ie_run")
    kern = resolve_kernel(kernel)
    stats = SearchStats()
    t0 = time.perf_counter()
    subs = list(ie_decompose(graph, params))
    _dispatch(
        subs,
        lambda sub: _run_subproblem(graph, params, pool, sub, kern, deadline),
        stats,
        workers,
    )
    stats.elapsed_ms = (time.perf_counter() - t0) * 1000.0
    return stats


def pbie_run(
    graph: BipartiteGraph,
    params: SearchParams,
    pool: ResultPool,
    kernel: Union[str, Kernel] = "fast",
    *,
    workers: int = 1,
    deadline: Optional[float] = None,
) -> SearchStats:
    """Progressive bounding with a seeded decomposition inside each window.

    Per window: reduce to the window's degree core, decompose the core with
    the window bounds as peeling floors, and run the kernel per subproblem
    with the window's partial-set caps. The pool deduplicates results found
    by overlapping windows.
    """
    _require_connectivity(params, "pbie_run")
    kern = resolve_kernel(kernel)
    stats = SearchStats()
    t0 = time.perf_counter()
    for step in pb_schedule(graph, params):
        lb_r = window_lb_r(pool.kth_edge_count, step.ub_l, params.theta_r)
        core = ab_core(graph, max(lb_r - params.k, 0), max(step.lb_l - params.k, 0))
        if core.is_empty:
            continue
        compact, left_map, right_map = core.compact()
        step_params = replace(params, ub_l=step.ub_l, ub_r=step.ub_r)
        base_origin: Origin = (graph, left_map, right_map)
        subs = list(
            ie_decompose(compact, step_params, min_l=step.lb_l, min_r=lb_r)
        )
        _dispatch(
            subs,
            lambda sub: _run_subproblem(
                compact, step_params, pool, sub, kern, deadline, base_origin
            ),
            stats,
            workers,
        )
    stats.elapsed_ms = (time.perf_counter() - t0) * 1000.0
    return stats


FRAMEWORKS = ("none", "pb", "ie", "pbie")


def warm_start(graph: BipartiteGraph, params: SearchParams, pool: ResultPool) -> int:
    """Offers a few greedily grown maximal k-biplexes to prime the pool.

    A non-empty pool makes the edge bound effective from the first branch
    instead of only after the first organically found result. Every offer
    goes through the usual verification, so this can only tighten pruning,
    never change what the search reports (on equal edge counts the pool
    keeps the earlier entry, and any greedy result is itself verified
    maximal). Returns the number of admitted seeds.
    """
    k = params.k
    admitted = 0
    for side in (Side.LEFT, Side.RIGHT):
        masks = graph.neighbor_masks(side)
        opp_masks = graph.neighbor_masks(side.opposite)
        n = graph.side_count(side)
        want = params.theta_l if side == Side.LEFT else params.theta_r
        opp_floor = params.theta_r if side == Side.LEFT else params.theta_l
        anchors = heapq.nlargest(
            2, range(n), key=lambda v: (len(graph.neighbors(side, v)), -v)
        )
        for anchor in anchors:
            base_mask = masks[anchor]
            if not base_mask:
                continue
            # Grow the anchor's side by shared-neighborhood strength.
            chosen = [anchor]
            chosen_mask = 1 << anchor
            while len(chosen) < want:
                best_v = -1
                best_score = -1
                for v in range(n):
                    if chosen_mask & (1 << v):
                        continue
                    score = (masks[v] & base_mask).bit_count()
                    if score > best_score:
                        best_v, best_score = v, score
                if best_v < 0:
                    break
                chosen.append(best_v)
                chosen_mask |= 1 << best_v
            if len(chosen) < want:
                continue
            # Opposite side: vertices within budget toward the chosen set,
            # admitted best-connected first while the pair stays a k-biplex.
            floor = len(chosen) - k
            ranked = sorted(
                (
                    ((opp_masks[u] & chosen_mask).bit_count(), u)
                    for u in bits_of(_union_mask(masks, chosen))
                ),
                reverse=True,
            )
            misses = {v: 0 for v in chosen}
            taken = []
            for conn, u in ranked:
                if conn < floor:
                    break
                missed = [v for v in chosen if not opp_masks[u] & (1 << v)]
                if any(misses[v] + 1 > k for v in missed):
                    continue
                for v in missed:
                    misses[v] += 1
                taken.append(u)
            if len(taken) < opp_floor:
                continue
            if side == Side.LEFT:
                left, right = set(chosen), set(taken)
            else:
                left, right = set(taken), set(chosen)
            _extend_to_maximal(graph, left, right, k)
            if offer_result(pool, graph, left, right, k, params):
                admitted += 1
    return admitted


def _union_mask(masks: Sequence[int], members: Iterable[int]) -> int:
    out = 0
    for v in members:
        out |= masks[v]
    return out


def _extend_to_maximal(
    graph: BipartiteGraph, left: set, right: set, k: int
) -> None:
    """Greedily grows a k-biplex in place until no vertex can join it."""
    left_masks = graph.nbr_masks_left
    right_masks = graph.nbr_masks_right
    while True:
        left_mask = _mask_from(left)
        right_mask = _mask_from(right)
        best = None
        for v in range(graph.left_count):
            if v in left:
                continue
            if len(right) - (left_masks[v] & right_mask).bit_count() > k:
                continue
            if any(
                len(left) + 1 - (right_masks[u] & left_mask).bit_count() - (
                    1 if left_masks[v] & (1 << u) else 0
                ) > k
                for u in right
            ):
                continue
            gain = (left_masks[v] & right_mask).bit_count()
            if best is None or gain > best[0]:
                best = (gain, Side.LEFT, v)
        for u in range(graph.right_count):
            if u in right:
                continue
            if len(left) - (right_masks[u] & left_mask).bit_count() > k:
                continue
            if any(
                len(right) + 1 - (left_masks[v] & right_mask).bit_count() - (
                    1 if right_masks[u] & (1 << v) else 0
                ) > k
                for v in left
            ):
                continue
            gain = (right_masks[u] & left_mask).bit_count()
            if best is None or gain > best[0]:
                best = (gain, Side.RIGHT, u)
        if best is None:
            return
        if best[1] == Side.LEFT:
            left.add(best[2])
        else:
            right.add(best[2])


def _mask_from(indices: Iterable[int]) -> int:
    out = 0
    for i in indices:
        out |= 1 << i
    return out


def run_search(
    graph: BipartiteGraph,
    params: SearchParams,
    pool: ResultPool,
    kernel: Union[str, Kernel] = "fast",
    framework: str = "pbie",
    *,
    workers: int = 1,
    deadline: Optional[float] = None,
) -> SearchStats:
    """Single entry point used by the CLI and the benchmark harness."""
    kern = resolve_kernel(kernel)
    warm_start(graph, params, pool)
    if framework == "none":
        return kern(graph, params, pool, deadline=deadline)
    if framework == "pb":
        return pb_run(graph, params, pool, kern, deadline=deadline)
    if framework == "ie":
        return ie_run(graph, params, pool, kern, workers=workers, deadline=deadline)
    if framework == "pbie":
        return pbie_run(graph, params, pool, kern, workers=workers, deadline=deadline)
    raise ValueError(f"unknown framework {framework!r}; expected one of {FRAMEWORKS}")
