"""Exact branch-and-bound kernels for maximal k-biplex search.

Two kernels share one driver. `basic_bb` branches on every candidate in
degree order, producing |C| children per node. `fast_bb` picks a pivot
vertex that still violates the disconnection budget and expands at most
a+1 or a+2 children (a <= k), which is what keeps its branching factor
strictly below 2 per vertex removed.

Both kernels run iteratively with an explicit frame stack: children are
materialized one at a time, and a parent branch is handed over to its last
child instead of being copied, so long exclude-only chains run in place
and peak frame memory follows the effective (not worst-case) depth.
"""
from __future__ import annotations

import time
from bisect import insort
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Optional

import numpy as np

from .biplexes import (
    Branch,
    PruneReason,
    ResultPool,
    SearchParams,
    offer_result,
    should_prune,
)
from .graph import (
    BipartiteGraph,
    Side,
    VertexRef,
    bits_of,
    bools_to_mask,
    mask_bools,
)

# Translation from a kernel-local graph back to the graph results are
# reported against: (original graph, left index map, right index map).
Origin = tuple[BipartiteGraph, tuple[int, ...], tuple[int, ...]]


class SearchTimeout(RuntimeError):
    """Raised inside a kernel when the deadline passes; pool stays valid."""


# Refinement applies its rejections in bulk (vectorized counter rebuild)
# once the reject count, weighted by this factor, exceeds the surviving
# member count; see refine_branch. Picked empirically: per-vertex
# adjacency walks win until the rejection wipes a sizable share of the
# branch, where one rebuild pass beats many walks.
_BULK_FACTOR = 6


@dataclass
class SearchStats:
    """Counters for one search run (kernel or framework level)."""

    branches: int = 0
    pruned: Counter = field(default_factory=Counter)
    terminals: int = 0
    elapsed_ms: float = 0.0
    max_children: int = 0
    max_prefix: int = 0
    max_pivot_a: int = 0

    def record_prune(self, reason: PruneReason) -> None:
        self.pruned[reason.value] += 1

    def merge(self, other: "SearchStats") -> None:
        self.branches += other.branches
        self.pruned.update(other.pruned)
        self.terminals += other.terminals
        self.elapsed_ms += other.elapsed_ms
        self.max_children = max(self.max_children, other.max_children)
        self.max_prefix = max(self.max_prefix, other.max_prefix)
        self.max_pivot_a = max(self.max_pivot_a, other.max_pivot_a)

    def to_json_obj(self, include_ms: bool = True) -> dict:
        obj = {
            "branches": self.branches,
            "pruned": {key: self.pruned[key] for key in sorted(self.pruned)},
            "terminals": self.terminals,
        }
        if include_ms:
            obj["ms"] = round(self.elapsed_ms, 3)
        return obj


class PivotChoice(NamedTuple):
    """A pivot vertex still violating the budget within S u C.

    Attributes:
        vertex: the chosen pivot.
        in_partial: True when the pivot sits in S (case 1), False for C.
        a: remaining budget of the pivot toward the partial set (k minus
            its disconnections into S on the opposite side); 0 <= a <= k.
        b: the pivot's disconnections into C on the opposite side; a < b.
    """

    vertex: VertexRef
    in_partial: bool
    a: int
    b: int


def select_pivot(branch: Branch, k: int) -> Optional[PivotChoice]:
    """Returns the branching pivot, or None when the branch is terminal.

    Terminal means no vertex of S u C exceeds k disconnections, i.e. the
    graph induced on S u C is itself a k-biplex. Otherwise the pivot is the
    vertex with the most disconnections toward S u C, preferring S over C;
    ties break left side first, then the smaller index.

    Scans only the branch's violator mask, permanently clearing entries
    whose disconnection count has fallen to k or below (they can never
    violate again, because excludes only lower the count).
    """
    # Sides scan left first and bits ascend, so a strict > on the count
    # reproduces the (count, left-before-right, smaller-index) tie-break
    # without allocating a key tuple per scanned vertex. The vectorized
    # path picks each pool's first maximum, which is the same vertex.
    s_nd = c_nd = -1
    s_side = s_v = c_side = c_v = 0
    for side in (0, 1):
        opp = 1 - side
        sc_opp = branch.s_sizes[opp] + branch.c_sizes[opp]
        conn = branch.conn_sc[side]
        s_mask = branch.s_mask[side]
        m = branch.viol[side]
        if m.bit_count() > 64:
            n = branch.graph.side_count(Side(side))
            counts = np.frombuffer(conn, dtype=np.int32)
            nd_arr = sc_opp - counts
            true_b = mask_bools(m, n) & (nd_arr > k)
            branch.viol[side] = bools_to_mask(true_b)
            s_b = true_b & mask_bools(s_mask, n)
            for pool_b, in_s in ((s_b, True), (true_b ^ s_b, False)):
                # Violators have nd > k >= 1, so a zero max means empty.
                vals = nd_arr * pool_b
                v = int(vals.argmax())
                nd = int(vals[v])
                if not nd:
                    continue
                if in_s:
                    if nd > s_nd:
                        s_nd, s_side, s_v = nd, side, v
                elif nd > c_nd:
                    c_nd, c_side, c_v = nd, side, v
            continue
        keep = m
        while m:
            low = m & -m
            v = low.bit_length() - 1
            m ^= low
            nd = sc_opp - conn[v]
            if nd <= k:
                keep ^= low
                continue
            if s_mask & low:
                if nd > s_nd:
                    s_nd, s_side, s_v = nd, side, v
            elif nd > c_nd:
                c_nd, c_side, c_v = nd, side, v
        branch.viol[side] = keep

    if s_nd >= 0:
        nd, side, index, in_partial = s_nd, s_side, s_v, True
    elif c_nd >= 0:
        nd, side, index, in_partial = c_nd, c_side, c_v, False
    else:
        return None
    side = Side(side)
    nd_s = branch.nondeg_s(side, index)
    a = k - nd_s
    b = nd - nd_s
    assert 0 <= a <= k, f"pivot budget a={a} outside [0, {k}]"
    assert a < b, f"pivot must still violate the budget (a={a}, b={b})"
    return PivotChoice(
        vertex=VertexRef(side, index), in_partial=in_partial, a=a, b=b
    )


def build_ordering(branch: Branch, pivot: PivotChoice, k: int) -> list[VertexRef]:
    """Materializes only the ordering prefix the pivot rule needs.

    The full conceptual ordering starts with the pivot's non-neighbors among
    the opposite candidates (ascending degree into S u C, ties by index),
    but only the first a+1 entries are ever branched on, plus the pivot
    itself in front when it is still a candidate. The returned prefix hence
    has at most k+2 vertices, which is also the per-frame storage bound.
    """
    side = pivot.vertex.side
    opp = 1 - side
    block_mask = branch.c_mask[opp] & ~branch.nmask[side][pivot.vertex.index]
    block_count = block_mask.bit_count()
    assert block_count == pivot.b, "pivot disconnection count drifted"
    conn = branch.conn_sc[opp]
    # Keep the (a+1) least-connected disconnected candidates, ties by index.
    need = pivot.a + 1
    opp_side = Side(opp)
    if block_count > 64:
        n = branch.graph.side_count(opp_side)
        counts = np.frombuffer(conn, dtype=np.int32).astype(np.int64)
        # One sortable key per vertex: connection count then index, with
        # non-block vertices pushed past any real key.
        keys = np.where(
            mask_bools(block_mask, n),
            counts * n + np.arange(n, dtype=np.int64),
            np.int64(1) << 62,
        )
        take = np.sort(np.partition(keys, need - 1)[:need])
        prefix = [VertexRef(opp_side, int(key % n)) for key in take]
    else:
        # Bits ascend, so once the list is full a candidate matching the
        # current worst connection count can never displace an entry.
        best: list[tuple[int, int]] = []
        worst = 1 << 60
        m = block_mask
        while m:
            low = m & -m
            u = low.bit_length() - 1
            m ^= low
            c = conn[u]
            if c >= worst and len(best) >= need:
                continue
            insort(best, (c, u))
            if len(best) > need:
                best.pop()
            worst = best[-1][0]
        prefix = [VertexRef(opp_side, u) for _, u in best]
    if not pivot.in_partial:
        prefix.insert(0, pivot.vertex)
    assert len(prefix) <= k + 2, "ordering prefix exceeded k+2"
    return prefix


def _candidate_moves(branch: Branch) -> list[tuple[int, int]]:
    """(side, index) pairs of all candidates in basic branching order."""
    items: list[tuple[int, int, int]] = []
    for side in (0, 1):
        conn = branch.conn_sc[side]
        m = branch.c_mask[side]
        while m:
            low = m & -m
            v = low.bit_length() - 1
            m ^= low
            items.append((conn[v], side, v))
    items.sort()
    return [(side, v) for _, side, v in items]


def candidate_ordering(branch: Branch) -> list[VertexRef]:
    """Full candidate ordering for basic branching.

    Candidates from both sides are sorted by ascending degree into S u C;
    ties break left side first, then the smaller index.
    """
    return [VertexRef(Side(side), v) for side, v in _candidate_moves(branch)]


def refine_branch(branch: Branch, k: int) -> None:
    """Tightens one branch in place after a move.

    Candidates that can no longer join S (their own budget toward S is
    spent, or some partial vertex on the other side already sits at exactly
    k disconnections and they are not adjacent to it) move from C to D.
    Excluded vertices whose budget toward the remaining S u C is spent can
    never extend the full completion, so they leave D entirely.

    Branches whose floors are armed (`Branch.set_floors`) additionally
    reject the candidates collected in `weak`: they are too weakly
    connected to appear in, or extend, any completion meeting the opposite
    size threshold. With floors unarmed (the default) the refined C is
    exactly the set of candidates that can still join S.

    The S-based rejection rules depend only on S, which refinement never
    touches, so one pass per side settles C. When rejections outnumber the
    survivors' rebuild cost, the moves are applied as one bulk exclusion
    with a counter rebuild instead of per-vertex updates.
    """
    rejects = [0, 0]
    for side in (0, 1):
        opp = 1 - side
        base = branch.c_mask[side]
        if not base:
            continue
        s_opp_size = branch.s_sizes[opp]
        rej = branch.weak[side]
        covered = -1
        if s_opp_size:
            # Candidates must cover every partial vertex already at budget k.
            nmask_opp = branch.nmask[opp]
            conn_s_opp = branch.conn_s[opp]
            size_here = branch.s_sizes[side]
            m = branch.s_mask[opp]
            while m:
                low = m & -m
                x = low.bit_length() - 1
                m ^= low
                if size_here - conn_s_opp[x] == k:
                    covered &= nmask_opp[x]
            rej |= base & ~covered
        if s_opp_size > k:
            floor_s = s_opp_size - k
            m = base & covered & ~rej
            if m.bit_count() > 32:
                counts = np.frombuffer(branch.conn_s[side], dtype=np.int32)
                rej |= bools_to_mask(counts < floor_s) & m
            else:
                conn_tight = branch.conn_s[side]
                while m:
                    low = m & -m
                    w = low.bit_length() - 1
                    m ^= low
                    if conn_tight[w] < floor_s:
                        rej |= low
        rejects[side] = rej

    total = rejects[0].bit_count() + rejects[1].bit_count()
    if total:
        # Per-vertex exclusion walks each reject's adjacency list; the bulk
        # rebuild pays one mask intersection per member of S u C u D (the
        # excluded set keeps live counters too, so it counts toward cost).
        members = (
            branch.s_sizes[0]
            + branch.c_sizes[0]
            + branch.s_sizes[1]
            + branch.c_sizes[1]
            + branch.d_mask[0].bit_count()
            + branch.d_mask[1].bit_count()
            - total
        )
        if total * _BULK_FACTOR > members:
            branch.bulk_exclude(rejects)
        else:
            for side in (0, 1):
                m = rejects[side]
                while m:
                    low = m & -m
                    branch.exclude(side, low.bit_length() - 1)
                    m ^= low

    # Only D members never yet tested can fail the exclusion-viability
    # rule (the margin is monotone once passed; see Branch docstring), so
    # the scan covers d_new alone, not all of D.
    for side in (0, 1):
        dm = branch.d_new[side]
        if not dm:
            continue
        opp = 1 - side
        floor = branch.s_sizes[opp] + branch.c_sizes[opp] - k
        conn = branch.conn_sc[side]
        drop = 0
        while dm:
            low = dm & -dm
            v = low.bit_length() - 1
            dm ^= low
            if conn[v] < floor:
                drop |= low
        if drop:
            branch.d_mask[side] &= ~drop
        branch.d_new[side] = 0


def refine_children(children: Iterable[Branch], k: int) -> None:
    for child in children:
        refine_branch(child, k)


def _materialize_fast_child(base: Branch, prefix: list[VertexRef], i: int) -> Branch:
    """Child i (1-based) of symmetric branching over the given prefix.

    Includes the first i-1 prefix vertices and excludes the i-th; callers
    pass a private copy (or the parent itself for the last child).
    """
    for j in range(i - 1):
        ref = prefix[j]
        base.include(ref.side, ref.index)
    ref = prefix[i - 1]
    base.exclude(ref.side, ref.index)
    return base


def sym_bk_children(
    branch: Branch, prefix: list[VertexRef], k: int, refine: bool = True
) -> list[Branch]:
    """All surviving children of symmetric branching, eagerly materialized.

    The kernel itself materializes lazily; this eager version backs unit
    tests and keeps the child-construction rule in one place.
    """
    children = []
    for i in range(1, len(prefix) + 1):
        child = _materialize_fast_child(branch.copy(), prefix, i)
        if refine:
            refine_branch(child, k)
        children.append(child)
    return children


def bk_children(
    branch: Branch, ordering: list[VertexRef], k: int, refine: bool = True
) -> list[Branch]:
    """All children of basic branching: child i includes ordering[i-1] and
    excludes everything before it."""
    children = []
    rolling = branch.copy()
    for i, ref in enumerate(ordering):
        child = rolling.copy()
        child.include(ref.side, ref.index)
        if refine:
            refine_branch(child, k)
        children.append(child)
        if i < len(ordering) - 1:
            rolling.exclude(ref.side, ref.index)
    return children


class _Frame:
    """One expanded branch plus its not-yet-materialized children."""

    __slots__ = ("branch", "moves", "pos", "count")

    def __init__(self, branch: Branch, moves: list[VertexRef], count: int) -> None:
        self.branch = branch
        self.moves = moves
        self.pos = 0
        self.count = count


def _offer_terminal(
    branch: Branch,
    graph: BipartiteGraph,
    params: SearchParams,
    pool: ResultPool,
    origin: Optional[Origin],
) -> None:
    left = bits_of(branch.s_mask[0] | branch.c_mask[0])
    right = bits_of(branch.s_mask[1] | branch.c_mask[1])
    if origin is None:
        offer_result(pool, graph, left, right, params.k, params)
    else:
        base, left_map, right_map = origin
        offer_result(
            pool,
            base,
            (left_map[v] for v in left),
            (right_map[u] for u in right),
            params.k,
            params,
        )


def _run_kernel(
    graph: BipartiteGraph,
    params: SearchParams,
    pool: ResultPool,
    start: Optional[Branch],
    origin: Optional[Origin],
    deadline: Optional[float],
    stats: Optional[SearchStats],
    fast: bool,
) -> SearchStats:
    if stats is None:
        stats = SearchStats()
    t0 = time.perf_counter()
    k = params.k
    # A candidate below these connection counts misses more than k vertices
    # of any opposite side large enough to report, so refinement may drop it.
    floors = (max(0, params.theta_r - k), max(0, params.theta_l - k))

    def expand(branch: Branch) -> Optional[_Frame]:
        """Processes one branch; returns a frame when it must be branched."""
        if deadline is not None and time.perf_counter() > deadline:
            raise SearchTimeout("search deadline exceeded")
        stats.branches += 1
        # Pruning runs before the terminal test: a child produced by a batch
        # of inclusions can already have an over-budget partial vertex, and
        # the not-a-biplex condition is what retires such branches. Every
        # condition is also sound for terminals (their offer could not have
        # been admitted anyway).
        reason = should_prune(branch, params, pool)
        if reason is not None:
            stats.record_prune(reason)
            return None
        pivot = select_pivot(branch, k)
        if pivot is None:
            stats.terminals += 1
            _offer_terminal(branch, graph, params, pool, origin)
            return None
        if fast:
            prefix = build_ordering(branch, pivot, k)
            count = len(prefix)
            cap = pivot.a + 1 if pivot.in_partial else pivot.a + 2
            assert count <= cap, "child count exceeded pivot bound"
            assert count <= k + 2, "child count exceeded k+2"
            stats.max_children = max(stats.max_children, count)
            stats.max_prefix = max(stats.max_prefix, count)
            stats.max_pivot_a = max(stats.max_pivot_a, pivot.a)
            return _Frame(branch, prefix, count)
        moves = _candidate_moves(branch)
        stats.max_children = max(stats.max_children, len(moves))
        return _Frame(branch, moves, len(moves))

    try:
        root = start if start is not None else Branch.initial(graph, k)
        root.set_floors(floors)
        refine_branch(root, k)
        stack: list[_Frame] = []
        frame = expand(root)
        if frame is not None:
            stack.append(frame)
        while stack:
            frame = stack[-1]
            if frame.pos >= frame.count:
                stack.pop()
                continue
            frame.pos += 1
            last = frame.pos == frame.count
            if fast:
                # Children explored largest-partial-set first; the final
                # (exclude-only) child inherits the parent branch in place.
                i = frame.count - frame.pos + 1
                base = frame.branch if last else frame.branch.copy()
                child = _materialize_fast_child(base, frame.moves, i)
            else:
                side, v = frame.moves[frame.pos - 1]
                base = frame.branch if last else frame.branch.copy()
                child = base
                child.include(side, v)
                if not last:
                    # The frame's branch rolls forward: every later child
                    # sees this vertex excluded instead of copied again.
                    frame.branch.exclude(side, v)
            if last:
                stack.pop()
            refine_branch(child, k)
            sub = expand(child)
            if sub is not None:
                stack.append(sub)
    finally:
        stats.elapsed_ms += (time.perf_counter() - t0) * 1000.0
    return stats


def basic_bb(
    graph: BipartiteGraph,
    params: SearchParams,
    pool: ResultPool,
    start: Optional[Branch] = None,
    *,
    origin: Optional[Origin] = None,
    deadline: Optional[float] = None,
    stats: Optional[SearchStats] = None,
) -> SearchStats:
    """Exhaustive kernel branching on every candidate per node."""
    return _run_kernel(graph, params, pool, start, origin, deadline, stats, fast=False)


def fast_bb(
    graph: BipartiteGraph,
    params: SearchParams,
    pool: ResultPool,
    start: Optional[Branch] = None,
    *,
    origin: Optional[Origin] = None,
    deadline: Optional[float] = None,
    stats: Optional[SearchStats] = None,
) -> SearchStats:
    """Pivot kernel expanding at most a+1 (pivot in S) or a+2 children."""
    return _run_kernel(graph, params, pool, start, origin, deadline, stats, fast=True)


def gamma_k(k: int, tol: float = 1e-12) -> float:
    """Base of the fast kernel's branching recurrence for budget k.

    Largest positive real root of x^(k+4) - 2 x^(k+3) + x^2 - x + 1, found
    by scanning down from 2 for a sign change and bisecting. The root lies
    strictly inside (1, 2) for every k >= 1.
    """
    if k < 1:
        raise ValueError("k must be at least 1")

    def poly(x: float) -> float:
        return x ** (k + 4) - 2.0 * x ** (k + 3) + x * x - x + 1.0

    hi = 2.0  # poly(2) == 3 for every k
    step = 1.0 / 1024.0
    lo = hi - step
    while lo > 1.0 and poly(lo) >= 0.0:
        hi = lo
        lo -= step
    if poly(lo) >= 0.0:
        raise ArithmeticError(f"no sign change located for k={k}")
    while hi - lo > tol:
        mid = (lo + hi) / 2.0
        if poly(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0
