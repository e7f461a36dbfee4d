"""Brute-force reference enumeration for small graphs.

Checks every pair of vertex subsets directly against the definitions, with
no sharing of logic with the kernels: bitmask adjacency, popcount budget
checks, and single-vertex maximality tests. Search results are validated
against this module, never the other way around.
"""
from __future__ import annotations

from dataclasses import dataclass

from .biplexes import FoundBiplex, SearchParams
from .graph import BipartiteGraph

# Beyond this many total vertices the subset enumeration is refused rather
# than allowed to run for hours.
MAX_ORACLE_VERTICES = 24


class OracleSizeError(ValueError):
    """Raised when a graph is too large for exhaustive enumeration."""


def _bit_indices(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


@dataclass(frozen=True)
class OracleResult:
    """Every maximal k-biplex meeting the thresholds, plus the top-K slice.

    `all_mbps` is sorted by descending edge count, ties by lexicographic
    vertex tuples; `topk` is its prefix, so tie-breaking at the K-th rank
    is deterministic here even when the search pool could legitimately keep
    a different tied entry.
    """

    all_mbps: tuple[FoundBiplex, ...]
    topk: tuple[FoundBiplex, ...]


def enumerate_all_mbps(graph: BipartiteGraph, params: SearchParams) -> OracleResult:
    """Enumerates maximal k-biplexes by checking all subset pairs.

    Raises:
        OracleSizeError: when the graph has more than MAX_ORACLE_VERTICES
            vertices in total.
    """
    n_left = graph.left_count
    n_right = graph.right_count
    if n_left + n_right > MAX_ORACLE_VERTICES:
        raise OracleSizeError(
            f"{n_left}+{n_right} vertices exceed the enumeration limit "
            f"of {MAX_ORACLE_VERTICES}"
        )
    k = params.k
    adj_left = [0] * n_left
    for v in range(n_left):
        for u in graph.adj_left[v]:
            adj_left[v] |= 1 << u
    adj_right = [0] * n_right
    for u in range(n_right):
        for v in graph.adj_right[u]:
            adj_right[u] |= 1 << v

    x_candidates = [
        (m, _bit_indices(m))
        for m in range(1, 1 << n_left)
        if m.bit_count() >= params.theta_l
    ]
    y_candidates = [
        (m, _bit_indices(m))
        for m in range(1, 1 << n_right)
        if m.bit_count() >= params.theta_r
    ]

    found: list[FoundBiplex] = []
    for x_mask, x_bits in x_candidates:
        x_size = len(x_bits)
        for y_mask, y_bits in y_candidates:
            # Budget check on both sides; collect saturated vertices for
            # the maximality test while at it.
            sat_right = 0
            ok = True
            edges = 0
            for u in y_bits:
                miss = (x_mask & ~adj_right[u]).bit_count()
                if miss > k:
                    ok = False
                    break
                if miss == k:
                    sat_right |= 1 << u
                edges += x_size - miss
            if not ok:
                continue
            sat_left = 0
            for v in x_bits:
                miss = (y_mask & ~adj_left[v]).bit_count()
                if miss > k:
                    ok = False
                    break
                if miss == k:
                    sat_left |= 1 << v
            if not ok:
                continue

            # Maximality: no single vertex from outside may be addable.
            maximal = True
            for w in range(n_left):
                if x_mask >> w & 1:
                    continue
                nbrs = adj_left[w]
                if (y_mask & ~nbrs).bit_count() <= k and sat_right & ~nbrs == 0:
                    maximal = False
                    break
            if maximal:
                for w in range(n_right):
                    if y_mask >> w & 1:
                        continue
                    nbrs = adj_right[w]
                    if (x_mask & ~nbrs).bit_count() <= k and sat_left & ~nbrs == 0:
                        maximal = False
                        break
            if maximal:
                found.append(
                    FoundBiplex(
                        left=tuple(x_bits), right=tuple(y_bits), edge_count=edges
                    )
                )

    found.sort(key=FoundBiplex.sort_key)
    return OracleResult(
        all_mbps=tuple(found), topk=tuple(found[: params.topk])
    )
