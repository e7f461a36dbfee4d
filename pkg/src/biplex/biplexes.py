"""k-biplex predicates, search parameters, branch state, and the result pool.

A k-biplex is an induced subgraph (X, Y) of a bipartite graph where every
vertex misses at most k vertices of the opposite side: each v in X has at
most k non-neighbors in Y and vice versa. The property is hereditary, so
any sub-pair of a k-biplex is again a k-biplex.
"""
from __future__ import annotations

import threading
from array import array
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np

from .graph import (
    BipartiteGraph,
    Side,
    bits_of,
    bools_to_mask,
    mask_bools,
    mask_words,
)


@dataclass(frozen=True)
class SearchParams:
    """Search configuration shared by kernels and frameworks.

    Attributes:
        k: disconnection budget per vertex (at least 1).
        topk: how many best results to keep (at least 1).
        theta_l: minimum left-side size of a reported result.
        theta_r: minimum right-side size.
        ub_l: optional hard cap on the partial left set (window pruning).
        ub_r: optional hard cap on the partial right set.
    """

    k: int
    topk: int
    theta_l: int
    theta_r: int
    ub_l: Optional[int] = None
    ub_r: Optional[int] = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.topk < 1:
            raise ValueError("topk must be at least 1")
        if self.theta_l < 1 or self.theta_r < 1:
            raise ValueError("size thresholds must be at least 1")
        if self.ub_l is not None and self.ub_l < self.theta_l:
            raise ValueError("ub_l below theta_l")
        if self.ub_r is not None and self.ub_r < self.theta_r:
            raise ValueError("ub_r below theta_r")

    @property
    def meets_connectivity_thresholds(self) -> bool:
        """True when both thresholds are at least 2k+1.

        In that regime every reported result is guaranteed connected, and
        the subproblem decomposition in frameworks.ie_decompose is exact.
        """
        floor = 2 * self.k + 1
        return self.theta_l >= floor and self.theta_r >= floor


class PruneReason(str, Enum):
    """Why a branch was cut; values double as JSON report keys."""

    NOT_BIPLEX = "not_biplex"
    SIZE_BOUND = "size_bound"
    EDGE_BOUND = "edge_bound"
    NON_MAXIMAL = "non_maximal"
    PB_UPPER_BOUND = "pb_upper_bound"


def is_k_biplex(
    graph: BipartiteGraph,
    left: Iterable[int],
    right: Iterable[int],
    k: int,
) -> bool:
    """Checks the disconnection budget on both sides of (left, right)."""
    left_set = set(left)
    right_set = set(right)
    for v in left_set:
        if len(right_set - graph.nbr_sets_left[v]) > k:
            return False
    for u in right_set:
        if len(left_set - graph.nbr_sets_right[u]) > k:
            return False
    return True


def _extension_candidates(
    graph: BipartiteGraph,
    left_set: frozenset[int],
    right_set: frozenset[int],
    k: int,
    side: Side,
) -> Iterable[int]:
    """Vertices on `side` that could be added while keeping a k-biplex.

    Assumes (left_set, right_set) is a k-biplex. A left candidate w needs at
    most k non-neighbors in right_set, and must be adjacent to every right
    vertex already at exactly k disconnections (else that vertex overflows).
    """
    own, opp = (left_set, right_set) if side == Side.LEFT else (right_set, left_set)
    saturated = [
        u
        for u in opp
        if len(own - graph.neighbor_set(side.opposite, u)) == k
    ]
    if len(opp) <= k:
        # Degree-wise anything qualifies; scan the whole side.
        candidates: Iterable[int] = (
            w for w in range(graph.side_count(side)) if w not in own
        )
    else:
        pool: set[int] = set()
        for u in opp:
            pool.update(graph.neighbors(side.opposite, u))
        candidates = (w for w in pool if w not in own)
    for w in candidates:
        nbrs = graph.neighbor_set(side, w)
        if len(opp - nbrs) > k:
            continue
        if all(u in nbrs for u in saturated):
            yield w


def is_maximal(
    graph: BipartiteGraph,
    left: Iterable[int],
    right: Iterable[int],
    k: int,
) -> bool:
    """True when no single vertex can be added without breaking the budget.

    Hereditariness makes the single-vertex test sound: if any strict
    k-biplex superset existed, some one-vertex extension would too.

    Raises:
        ValueError: if (left, right) is not itself a k-biplex.
    """
    left_set = frozenset(left)
    right_set = frozenset(right)
    if not is_k_biplex(graph, left_set, right_set, k):
        raise ValueError("maximality is only defined for a k-biplex")
    for side in (Side.LEFT, Side.RIGHT):
        for _ in _extension_candidates(graph, left_set, right_set, k, side):
            return False
    return True


def is_connected(
    graph: BipartiteGraph, left: Iterable[int], right: Iterable[int]
) -> bool:
    """BFS connectivity over the induced subgraph on (left, right).

    Raises:
        ValueError: if both sides are empty.
    """
    left_set = set(left)
    right_set = set(right)
    if not left_set and not right_set:
        raise ValueError("connectivity is undefined for the empty subgraph")
    start = (
        (Side.LEFT, next(iter(left_set)))
        if left_set
        else (Side.RIGHT, next(iter(right_set)))
    )
    seen = {start}
    frontier = deque([start])
    while frontier:
        side, idx = frontier.popleft()
        members = right_set if side == Side.LEFT else left_set
        for nbr in graph.neighbors(side, idx):
            if nbr in members:
                ref = (side.opposite, nbr)
                if ref not in seen:
                    seen.add(ref)
                    frontier.append(ref)
    return len(seen) == len(left_set) + len(right_set)


@dataclass(frozen=True)
class FoundBiplex:
    """An accepted result: sorted vertex tuples plus the induced edge count."""

    left: tuple[int, ...]
    right: tuple[int, ...]
    edge_count: int

    @classmethod
    def from_sets(
        cls, graph: BipartiteGraph, left: Iterable[int], right: Iterable[int]
    ) -> "FoundBiplex":
        left_t = tuple(sorted(left))
        right_t = tuple(sorted(right))
        right_set = frozenset(right_t)
        edges = sum(
            sum(1 for u in graph.adj_left[v] if u in right_set) for v in left_t
        )
        return cls(left=left_t, right=right_t, edge_count=edges)

    @property
    def key(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return (self.left, self.right)

    @property
    def vertex_count(self) -> int:
        return len(self.left) + len(self.right)

    def sort_key(self) -> tuple:
        """Canonical report order: most edges first, then lexicographic sets."""
        return (-self.edge_count, self.left, self.right)

    def to_json_obj(
        self,
        left_labels: Optional[Sequence[str]] = None,
        right_labels: Optional[Sequence[str]] = None,
    ) -> dict:
        left = (
            [left_labels[v] for v in self.left] if left_labels is not None else list(self.left)
        )
        right = (
            [right_labels[u] for u in self.right]
            if right_labels is not None
            else list(self.right)
        )
        return {"left": left, "right": right, "edges": self.edge_count}


class ResultPool:
    """Top-K result collector with duplicate suppression.

    Keeps at most `capacity` entries, ordered by edge count. A newcomer must
    strictly beat the current K-th edge count once the pool is full; on a tie
    the incumbent stays. Offers are serialized by an internal lock so kernels
    running in worker threads can share one pool.
    """

    def __init__(self, capacity: int) -> None:
        if capacity < 1:
            raise ValueError("capacity must be at least 1")
        self.capacity = capacity
        self._entries: dict[tuple, FoundBiplex] = {}
        self._lock = threading.Lock()
        self._kth = 0
        self.offers = 0
        self.accepted = 0
        self.duplicate_offers = 0

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def is_full(self) -> bool:
        return len(self._entries) >= self.capacity

    @property
    def kth_edge_count(self) -> int:
        """Edge count of the K-th entry; zero until the pool is full."""
        return self._kth

    def entries_sorted(self) -> list[FoundBiplex]:
        return sorted(self._entries.values(), key=FoundBiplex.sort_key)

    def best_edge_count(self) -> int:
        return max((e.edge_count for e in self._entries.values()), default=0)

    def edge_multiset(self) -> list[int]:
        return sorted((e.edge_count for e in self._entries.values()), reverse=True)

    def _admit(self, candidate: FoundBiplex) -> bool:
        # Caller holds the lock.
        if candidate.key in self._entries:
            self.duplicate_offers += 1
            return False
        if self.is_full and candidate.edge_count <= self._kth:
            return False
        self._entries[candidate.key] = candidate
        if len(self._entries) > self.capacity:
            evict = min(
                self._entries.values(), key=lambda e: (e.edge_count, e.key)
            )
            del self._entries[evict.key]
        if self.is_full:
            self._kth = min(e.edge_count for e in self._entries.values())
        self.accepted += 1
        return True


def offer_result(
    pool: ResultPool,
    graph: BipartiteGraph,
    left: Iterable[int],
    right: Iterable[int],
    k: int,
    params: SearchParams,
) -> bool:
    """Offers (left, right) to the pool; returns True when it was admitted.

    Admission requires, in evaluation order: both size thresholds met, the
    pair is a k-biplex, it is maximal in `graph` (re-verified here, so
    callers may offer candidates straight from reduced subproblems), it is
    not already pooled, and it beats the K-th edge count when the pool is
    full. Maximality runs before the lock is taken to keep the critical
    section short.
    """
    left_t = tuple(sorted(left))
    right_t = tuple(sorted(right))
    pool.offers += 1
    if len(left_t) < params.theta_l or len(right_t) < params.theta_r:
        return False
    if not is_k_biplex(graph, left_t, right_t, k):
        return False
    if not is_maximal(graph, left_t, right_t, k):
        return False
    candidate = FoundBiplex.from_sets(graph, left_t, right_t)
    with pool._lock:
        return pool._admit(candidate)


class Branch:
    """Mutable search node: partial set S, candidates C, excluded D.

    Each of S, C, D is a pair of per-side bitmasks over a fixed graph, and
    two connection counters are maintained for every vertex (members of D
    included, since exclusion pruning reads them):

        conn_s[side][v]  = neighbors of v inside S on the opposite side
        conn_sc[side][v] = neighbors of v inside S u C on the opposite side

    Disconnection counts derive from side sizes minus these. Extra state
    keeps per-node work away from whole-graph scans:

      * `edges_sc` tracks the edge count of the graph induced on S u C.
      * `dead` latches True the moment any partial vertex exceeds the
        budget toward S; since S only grows along a lineage, a broken
        partial set never recovers.
      * `viol[side]` over-approximates the S u C vertices whose
        disconnections toward S u C still exceed k. Excluding is the only
        move that changes those counts and it only lowers them, so the
        true violator set shrinks monotonically; the mask is cleaned
        lazily during pivot selection and inherited by children.
      * `weak[side]` holds exactly the candidates whose connections into
        the opposite S u C fell below `floors[side]` (see `set_floors`).
        The mask is maintained at the moment a connection count crosses
        the floor, so refinement consumes it without scanning C.
      * `d_new[side]` holds the D members that have not yet been checked
        against the exclusion-viability rule (connections into the
        remaining opposite S u C at least its size minus k). A member
        that passes the check once can never fail it later: an excluded
        neighbor lowers count and threshold together, an excluded
        non-neighbor only the threshold, and inclusions change neither.
        Refinement therefore tests just this mask, not all of D.

    After a bulk exclusion (see `bulk_exclude`) counters are only kept
    accurate for vertices still in S u C u D; vertices that left the
    universe are never consulted again.
    """

    __slots__ = (
        "graph",
        "k",
        "adj",
        "nmask",
        "s_mask",
        "c_mask",
        "d_mask",
        "s_sizes",
        "c_sizes",
        "conn_s",
        "conn_sc",
        "edges_sc",
        "viol",
        "dead",
        "floors",
        "weak",
        "d_new",
    )

    def __init__(
        self,
        graph: BipartiteGraph,
        k: int,
        s_mask: list[int],
        c_mask: list[int],
        d_mask: list[int],
        s_sizes: list[int],
        c_sizes: list[int],
        conn_s: tuple[array, array],
        conn_sc: tuple[array, array],
        edges_sc: int,
        viol: list[int],
        dead: bool,
        floors: tuple[int, int] = (0, 0),
        weak: Optional[list[int]] = None,
        d_new: Optional[list[int]] = None,
    ) -> None:
        self.graph = graph
        self.k = k
        self.adj = (graph.adj_left, graph.adj_right)
        self.nmask = (graph.nbr_masks_left, graph.nbr_masks_right)
        self.s_mask = s_mask
        self.c_mask = c_mask
        self.d_mask = d_mask
        self.s_sizes = s_sizes
        self.c_sizes = c_sizes
        self.conn_s = conn_s
        self.conn_sc = conn_sc
        self.edges_sc = edges_sc
        self.viol = viol
        self.dead = dead
        self.floors = floors
        self.weak = [0, 0] if weak is None else weak
        self.d_new = list(d_mask) if d_new is None else d_new

    @classmethod
    def initial(cls, graph: BipartiteGraph, k: int) -> "Branch":
        """Root branch: S and D empty, every vertex a candidate."""
        full = [(1 << graph.left_count) - 1, (1 << graph.right_count) - 1]
        return cls(
            graph=graph,
            k=k,
            s_mask=[0, 0],
            c_mask=list(full),
            d_mask=[0, 0],
            s_sizes=[0, 0],
            c_sizes=[graph.left_count, graph.right_count],
            conn_s=(
                array("i", bytes(4 * graph.left_count)),
                array("i", bytes(4 * graph.right_count)),
            ),
            conn_sc=(
                array("i", (len(nbrs) for nbrs in graph.adj_left)),
                array("i", (len(nbrs) for nbrs in graph.adj_right)),
            ),
            edges_sc=graph.edge_count,
            viol=list(full),
            dead=False,
        )

    @classmethod
    def seeded(
        cls,
        graph: BipartiteGraph,
        k: int,
        s_left: Iterable[int] = (),
        s_right: Iterable[int] = (),
        d_left: Iterable[int] = (),
        d_right: Iterable[int] = (),
    ) -> "Branch":
        """Branch with a prescribed S and D; C is everything else.

        Counters are computed from scratch in O(|E|).
        """
        s = [_mask_from(s_left), _mask_from(s_right)]
        d = [_mask_from(d_left), _mask_from(d_right)]
        if s[0] & d[0] or s[1] & d[1]:
            raise ValueError("S and D overlap")
        full = [(1 << graph.left_count) - 1, (1 << graph.right_count) - 1]
        if (s[0] | d[0]) & ~full[0] or (s[1] | d[1]) & ~full[1]:
            raise ValueError("seed vertex out of range")
        c = [full[0] & ~(s[0] | d[0]), full[1] & ~(s[1] | d[1])]
        conn_s = (
            array("i", bytes(4 * graph.left_count)),
            array("i", bytes(4 * graph.right_count)),
        )
        conn_sc = (
            array("i", bytes(4 * graph.left_count)),
            array("i", bytes(4 * graph.right_count)),
        )
        words = graph.word_counts
        edges_sc = 0
        for side in (0, 1):
            opp = 1 - side
            n = graph.side_count(Side(side))
            if not n:
                continue
            nbr_words = graph.neighbor_words(Side(side))
            in_s = np.bitwise_count(
                nbr_words & mask_words(s[opp], words[opp])
            ).sum(axis=1, dtype=np.int32)
            in_sc = np.bitwise_count(
                nbr_words & mask_words(s[opp] | c[opp], words[opp])
            ).sum(axis=1, dtype=np.int32)
            conn_s[side][:] = array("i", in_s.tobytes())
            conn_sc[side][:] = array("i", in_sc.tobytes())
            if side == 0:
                edges_sc = int(in_sc[mask_bools(s[0] | c[0], n)].sum())
        s_sizes = [s[0].bit_count(), s[1].bit_count()]
        dead = False
        for side in (0, 1):
            opp_size = s_sizes[1 - side]
            for v in bits_of(s[side]):
                if opp_size - conn_s[side][v] > k:
                    dead = True
        return cls(
            graph=graph,
            k=k,
            s_mask=s,
            c_mask=c,
            d_mask=d,
            s_sizes=s_sizes,
            c_sizes=[c[0].bit_count(), c[1].bit_count()],
            conn_s=conn_s,
            conn_sc=conn_sc,
            edges_sc=edges_sc,
            viol=[s[0] | c[0], s[1] | c[1]],
            dead=dead,
        )

    def copy(self) -> "Branch":
        return Branch(
            graph=self.graph,
            k=self.k,
            s_mask=list(self.s_mask),
            c_mask=list(self.c_mask),
            d_mask=list(self.d_mask),
            s_sizes=list(self.s_sizes),
            c_sizes=list(self.c_sizes),
            conn_s=(self.conn_s[0][:], self.conn_s[1][:]),
            conn_sc=(self.conn_sc[0][:], self.conn_sc[1][:]),
            edges_sc=self.edges_sc,
            viol=list(self.viol),
            dead=self.dead,
            floors=self.floors,
            weak=list(self.weak),
            d_new=list(self.d_new),
        )

    def set_floors(self, floors: tuple[int, int]) -> None:
        """Arms the per-side candidate connection floors.

        floors[side] is the fewest connections into the opposite S u C a
        candidate on `side` needs to ever sit in (or extend) a completion
        whose opposite side meets its size threshold; anything weaker
        already misses more than k vertices of such a side. Kernels call
        this once on the root; from then on `exclude` and `bulk_exclude`
        keep `weak` synchronized as counts cross a floor.
        """
        self.floors = floors
        for side in (0, 1):
            floor = floors[side]
            mask = 0
            if floor > 0 and self.c_mask[side]:
                n = self.graph.side_count(Side(side))
                counts = np.frombuffer(self.conn_sc[side], dtype=np.int32)
                mask = bools_to_mask(
                    mask_bools(self.c_mask[side], n) & (counts < floor)
                )
            self.weak[side] = mask

    # -- derived quantities --------------------------------------------------

    def s_size(self, side: Side) -> int:
        return self.s_sizes[side]

    def sc_size(self, side: Side) -> int:
        return self.s_sizes[side] + self.c_sizes[side]

    def s_members(self, side: Side) -> list[int]:
        return list(bits_of(self.s_mask[side]))

    def c_members(self, side: Side) -> list[int]:
        return list(bits_of(self.c_mask[side]))

    def d_members(self, side: Side) -> list[int]:
        return list(bits_of(self.d_mask[side]))

    def nondeg_s(self, side: Side, v: int) -> int:
        """Disconnections of v toward S on the opposite side."""
        return self.s_sizes[1 - side] - self.conn_s[side][v]

    def nondeg_sc(self, side: Side, v: int) -> int:
        """Disconnections of v toward S u C on the opposite side."""
        opp = 1 - side
        return self.s_sizes[opp] + self.c_sizes[opp] - self.conn_sc[side][v]

    # -- moves ---------------------------------------------------------------

    def include(self, side: Side, v: int) -> None:
        """Moves v from C into S, latching `dead` on any budget break."""
        bit = 1 << v
        if not self.c_mask[side] & bit:
            raise KeyError(f"vertex {v} is not a candidate on side {side}")
        self.c_mask[side] ^= bit
        self.s_mask[side] |= bit
        self.weak[side] &= ~bit
        self.c_sizes[side] -= 1
        self.s_sizes[side] += 1
        opp = 1 - side
        conn = self.conn_s[opp]
        for u in self.adj[side][v]:
            conn[u] += 1
        if self.dead:
            return
        k = self.k
        if self.s_sizes[opp] - self.conn_s[side][v] > k:
            self.dead = True
            return
        # Partial vertices opposite v that v does not cover lost one unit
        # of budget; any of them crossing k kills every completion.
        missed = self.s_mask[opp] & ~self.nmask[side][v]
        if missed:
            size_here = self.s_sizes[side]
            while missed:
                low = missed & -missed
                u = low.bit_length() - 1
                missed ^= low
                if size_here - conn[u] > k:
                    self.dead = True
                    return

    def exclude(self, side: Side, v: int) -> None:
        """Moves v from C into D, shrinking the S u C universe."""
        bit = 1 << v
        if not self.c_mask[side] & bit:
            raise KeyError(f"vertex {v} is not a candidate on side {side}")
        self.c_mask[side] ^= bit
        self.d_mask[side] |= bit
        self.d_new[side] |= bit
        self.c_sizes[side] -= 1
        self.viol[side] &= ~bit
        self.weak[side] &= ~bit
        self.edges_sc -= self.conn_sc[side][v]
        opp = 1 - side
        conn = self.conn_sc[opp]
        mark = self.floors[opp] - 1  # count just crossed below the floor
        crossed = 0
        for u in self.adj[side][v]:
            c = conn[u] - 1
            conn[u] = c
            if c == mark:
                crossed |= 1 << u
        if crossed:
            self.weak[opp] |= crossed & self.c_mask[opp]

    def drop_from_d(self, side: Side, v: int) -> None:
        bit = 1 << v
        if not self.d_mask[side] & bit:
            raise KeyError(f"vertex {v} is not excluded on side {side}")
        self.d_mask[side] ^= bit
        self.d_new[side] &= ~bit

    def bulk_exclude(self, rejects: Sequence[int]) -> None:
        """Excludes whole per-side masks at once, then rebuilds counters.

        Used when a refinement rejects most of C: per-vertex exclusion
        would pay a neighborhood update for every rejected vertex, while
        the rebuild recomputes every connection count in a handful of
        vectorized popcount passes. A rejected vertex is kept in D only
        when its rebuilt count still allows it to extend some completion;
        the rest leave the universe for good, which only forfeits optional
        pruning (results are re-verified for maximality against the full
        graph when offered).
        """
        graph = self.graph
        words = graph.word_counts
        k = self.k
        for side in (0, 1):
            rej = rejects[side]
            if rej:
                self.c_mask[side] &= ~rej
                self.c_sizes[side] -= rej.bit_count()
        sc = [
            self.s_mask[0] | self.c_mask[0],
            self.s_mask[1] | self.c_mask[1],
        ]
        for side in (0, 1):
            opp = 1 - side
            n = graph.left_count if side == 0 else graph.right_count
            if not n:
                continue
            counts = np.frombuffer(self.conn_sc[side], dtype=np.int32)
            if rejects[opp]:
                # Connection counts on this side only depend on the other
                # side's S u C, so a one-sided rejection leaves them exact.
                # Counts are only promised for the still-live vertices (and
                # this call's rejects, tested for D below); when those are a
                # minority, recompute just their rows.
                opp_words = mask_words(sc[opp], words[opp])
                live = sc[side] | self.d_mask[side] | rejects[side]
                if live.bit_count() * 2 < n:
                    idx = np.nonzero(mask_bools(live, n))[0]
                    counts[idx] = np.bitwise_count(
                        graph.neighbor_words(Side(side))[idx] & opp_words
                    ).sum(axis=1, dtype=np.int32)
                else:
                    counts[:] = np.bitwise_count(
                        graph.neighbor_words(Side(side)) & opp_words
                    ).sum(axis=1, dtype=np.int32)
            rej = rejects[side]
            if rej:
                needed = self.s_sizes[opp] + self.c_sizes[opp] - k
                self.d_mask[side] |= bools_to_mask(counts >= needed) & rej
                self.d_new[side] &= ~rej
            floor = self.floors[side]
            if floor > 0 and self.c_mask[side]:
                self.weak[side] = bools_to_mask(counts < floor) & self.c_mask[side]
            else:
                self.weak[side] = 0
            self.viol[side] &= sc[side]
            if side == 0:
                self.edges_sc = (
                    int(counts[mask_bools(sc[0], n)].sum()) if sc[0] else 0
                )

    def check_counters(self) -> None:
        """Recomputes all incremental state from scratch; raises on mismatch.

        Counter accuracy is only promised for vertices still in S u C u D.
        """
        for side in (0, 1):
            opp = 1 - side
            s_opp = self.s_mask[opp]
            sc_opp = self.s_mask[opp] | self.c_mask[opp]
            if self.s_mask[side] & self.c_mask[side]:
                raise AssertionError(f"S and C overlap on side {side}")
            if (self.s_mask[side] | self.c_mask[side]) & self.d_mask[side]:
                raise AssertionError(f"D overlaps S u C on side {side}")
            if self.s_sizes[side] != self.s_mask[side].bit_count():
                raise AssertionError(f"s_sizes[{side}] drifted")
            if self.c_sizes[side] != self.c_mask[side].bit_count():
                raise AssertionError(f"c_sizes[{side}] drifted")
            live = self.s_mask[side] | self.c_mask[side] | self.d_mask[side]
            for v in bits_of(live):
                nm = self.nmask[side][v]
                want_s = (nm & s_opp).bit_count()
                want_sc = (nm & sc_opp).bit_count()
                if self.conn_s[side][v] != want_s:
                    raise AssertionError(
                        f"conn_s[{side}][{v}] = {self.conn_s[side][v]}, expected {want_s}"
                    )
                if self.conn_sc[side][v] != want_sc:
                    raise AssertionError(
                        f"conn_sc[{side}][{v}] = {self.conn_sc[side][v]}, expected {want_sc}"
                    )
            truly = 0
            sc_opp_size = sc_opp.bit_count()
            for v in bits_of(self.s_mask[side] | self.c_mask[side]):
                nm = self.nmask[side][v]
                if sc_opp_size - (nm & sc_opp).bit_count() > self.k:
                    truly |= 1 << v
            if truly & ~self.viol[side]:
                raise AssertionError(f"viol[{side}] lost a true violator")
            if self.viol[side] & ~(self.s_mask[side] | self.c_mask[side]):
                raise AssertionError(f"viol[{side}] contains non-members")
            want_weak = 0
            floor = self.floors[side]
            if floor > 0:
                for v in bits_of(self.c_mask[side]):
                    if (self.nmask[side][v] & sc_opp).bit_count() < floor:
                        want_weak |= 1 << v
            if self.weak[side] != want_weak:
                raise AssertionError(
                    f"weak[{side}] = {self.weak[side]:#x}, expected {want_weak:#x}"
                )
            if self.d_new[side] & ~self.d_mask[side]:
                raise AssertionError(f"d_new[{side}] outside D")
        want_dead = False
        for side in (0, 1):
            opp_size = self.s_sizes[1 - side]
            for v in bits_of(self.s_mask[side]):
                if opp_size - self.conn_s[side][v] > self.k:
                    want_dead = True
        if want_dead != self.dead:
            raise AssertionError(f"dead = {self.dead}, expected {want_dead}")
        want_edges = sum(
            self.conn_sc[0][v]
            for v in bits_of(self.s_mask[0] | self.c_mask[0])
        )
        if self.edges_sc != want_edges:
            raise AssertionError(f"edges_sc = {self.edges_sc}, expected {want_edges}")


def _mask_from(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << i
    return mask


def tau_bounds(branch: Branch, k: int) -> tuple[int, int]:
    """Upper bounds on the final side sizes of any completion of the branch.

    A completed left side cannot exceed the least-connected partial right
    vertex's degree into S u C plus the budget k; symmetric on the other
    side. With an empty partial right set the left bound degrades to the
    whole available left side (and vice versa).
    """
    m = branch.s_mask[1]
    if m:
        conn = branch.conn_sc[1]
        best = 1 << 60
        while m:
            low = m & -m
            c = conn[low.bit_length() - 1]
            m ^= low
            if c < best:
                best = c
        tau_l = best + k
    else:
        tau_l = branch.s_sizes[0] + branch.c_sizes[0]
    m = branch.s_mask[0]
    if m:
        conn = branch.conn_sc[0]
        best = 1 << 60
        while m:
            low = m & -m
            c = conn[low.bit_length() - 1]
            m ^= low
            if c < best:
                best = c
        tau_r = best + k
    else:
        tau_r = branch.s_sizes[1] + branch.c_sizes[1]
    return tau_l, tau_r


def should_prune(
    branch: Branch, params: SearchParams, pool: ResultPool
) -> Optional[PruneReason]:
    """First matching prune condition for the branch, or None.

    Checked in a fixed order: the partial set itself violates the budget;
    the size bounds cannot reach the thresholds; the branch cannot beat the
    pool's K-th edge count (only once the pool is full); an excluded vertex
    would extend every completion, so none is maximal; the window caps on
    the partial sides are exceeded.
    """
    k = params.k
    if branch.dead:
        return PruneReason.NOT_BIPLEX

    tau_l, tau_r = tau_bounds(branch, k)
    if tau_l < params.theta_l or tau_r < params.theta_r:
        return PruneReason.SIZE_BOUND

    if pool.is_full:
        kth = pool.kth_edge_count
        if branch.edges_sc <= kth or tau_l * tau_r <= kth:
            return PruneReason.EDGE_BOUND

    for side in (0, 1):
        dm = branch.d_mask[side]
        if not dm:
            continue
        opp = 1 - side
        sc_opp_mask = branch.s_mask[opp] | branch.c_mask[opp]
        # v can rejoin every completion iff its own budget holds toward
        # S u C and no vertex it misses there sits at budget k or above.
        alive_floor = branch.s_sizes[opp] + branch.c_sizes[opp] - k
        crit_cap = branch.s_sizes[side] + branch.c_sizes[side] - k
        conn_side = branch.conn_sc[side]
        conn_opp = branch.conn_sc[opp]
        nmask = branch.nmask[side]
        while dm:
            low = dm & -dm
            v = low.bit_length() - 1
            dm ^= low
            if conn_side[v] < alive_floor:
                continue
            miss = sc_opp_mask & ~nmask[v]
            extends_all = True
            while miss:
                mlow = miss & -miss
                w = mlow.bit_length() - 1
                miss ^= mlow
                if conn_opp[w] <= crit_cap:
                    extends_all = False
                    break
            if extends_all:
                return PruneReason.NON_MAXIMAL

    if params.ub_l is not None and branch.s_sizes[0] > params.ub_l:
        return PruneReason.PB_UPPER_BOUND
    if params.ub_r is not None and branch.s_sizes[1] > params.ub_r:
        return PruneReason.PB_UPPER_BOUND

    return None
