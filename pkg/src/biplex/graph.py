"""Bipartite graph primitives.

Vertices on each side are dense integer indices. Edges always run between a
left vertex and a right vertex; adjacency is stored twice (once per side) as
sorted tuples, with frozenset views built lazily for membership tests.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property
from pathlib import Path
from typing import IO, Iterable, Iterator, NamedTuple, Sequence

import numpy as np


class Side(IntEnum):
    """Which partition a vertex belongs to."""

    LEFT = 0
    RIGHT = 1

    @property
    def opposite(self) -> "Side":
        return Side(1 - self.value)


class VertexRef(NamedTuple):
    """A vertex identified by side and index within that side."""

    side: Side
    index: int


class ParseError(ValueError):
    """Raised when an edge-list file cannot be parsed.

    Attributes:
        line_number: 1-based line number of the offending line.
    """

    def __init__(self, message: str, line_number: int) -> None:
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


def _mask_of(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << i
    return mask


def bits_of(mask: int) -> Iterator[int]:
    """Yields the set bit positions of a non-negative int, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_words(mask: int, words: int) -> np.ndarray:
    """A bitmask as a little-endian uint64 word vector of fixed width."""
    return np.frombuffer(mask.to_bytes(words * 8, "little"), dtype=np.uint64)


def mask_bools(mask: int, count: int) -> np.ndarray:
    """A bitmask as a boolean vector over the first `count` positions."""
    if not count:
        return np.zeros(0, dtype=bool)
    raw = np.frombuffer(
        mask.to_bytes((count + 7) // 8, "little"), dtype=np.uint8
    )
    return np.unpackbits(raw, bitorder="little", count=count).astype(bool, copy=False)


def bools_to_mask(bits: np.ndarray) -> int:
    """Inverse of mask_bools: a boolean vector back to an int bitmask."""
    if not bits.size:
        return 0
    return int.from_bytes(
        np.packbits(bits, bitorder="little").tobytes(), "little"
    )


@dataclass(frozen=True)
class BipartiteGraph:
    """Immutable bipartite graph with per-side integer vertex indices.

    Attributes:
        left_count: number of left vertices (indices 0..left_count-1).
        right_count: number of right vertices.
        adj_left: for each left vertex, sorted tuple of right neighbors.
        adj_right: for each right vertex, sorted tuple of left neighbors.
        edge_count: total number of (deduplicated) edges.
    """

    left_count: int
    right_count: int
    adj_left: tuple[tuple[int, ...], ...]
    adj_right: tuple[tuple[int, ...], ...]
    edge_count: int

    @classmethod
    def from_edges(
        cls,
        left_count: int,
        right_count: int,
        edges: Iterable[tuple[int, int]],
    ) -> "BipartiteGraph":
        """Builds a graph from (left_index, right_index) pairs.

        Duplicate edges are collapsed. Raises ValueError on out-of-range
        indices or negative side sizes.
        """
        if left_count < 0 or right_count < 0:
            raise ValueError("side sizes must be non-negative")
        left_sets: list[set[int]] = [set() for _ in range(left_count)]
        right_sets: list[set[int]] = [set() for _ in range(right_count)]
        for v, u in edges:
            if not (0 <= v < left_count and 0 <= u < right_count):
                raise ValueError(f"edge ({v}, {u}) out of range")
            left_sets[v].add(u)
            right_sets[u].add(v)
        adj_left = tuple(tuple(sorted(s)) for s in left_sets)
        adj_right = tuple(tuple(sorted(s)) for s in right_sets)
        return cls(
            left_count=left_count,
            right_count=right_count,
            adj_left=adj_left,
            adj_right=adj_right,
            edge_count=sum(len(s) for s in left_sets),
        )

    @cached_property
    def nbr_sets_left(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(nbrs) for nbrs in self.adj_left)

    @cached_property
    def nbr_sets_right(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(nbrs) for nbrs in self.adj_right)

    @cached_property
    def nbr_masks_left(self) -> tuple[int, ...]:
        """Adjacency of each left vertex as a bitmask over right indices."""
        return tuple(_mask_of(nbrs) for nbrs in self.adj_left)

    @cached_property
    def nbr_masks_right(self) -> tuple[int, ...]:
        """Adjacency of each right vertex as a bitmask over left indices."""
        return tuple(_mask_of(nbrs) for nbrs in self.adj_right)

    def neighbor_masks(self, side: Side) -> tuple[int, ...]:
        return self.nbr_masks_left if side == Side.LEFT else self.nbr_masks_right

    @cached_property
    def word_counts(self) -> tuple[int, int]:
        """uint64 words needed for a mask over (left, right) indices."""
        return ((self.left_count + 63) // 64, (self.right_count + 63) // 64)

    @cached_property
    def nbr_words_left(self) -> np.ndarray:
        """Left adjacency bitmasks as a (left_count, words) uint64 matrix."""
        return self._pack_words(self.nbr_masks_left, self.word_counts[1])

    @cached_property
    def nbr_words_right(self) -> np.ndarray:
        """Right adjacency bitmasks as a (right_count, words) uint64 matrix."""
        return self._pack_words(self.nbr_masks_right, self.word_counts[0])

    @staticmethod
    def _pack_words(masks: tuple[int, ...], words: int) -> np.ndarray:
        if not masks:
            return np.zeros((0, words), dtype=np.uint64)
        buf = b"".join(m.to_bytes(words * 8, "little") for m in masks)
        return np.frombuffer(buf, dtype=np.uint64).reshape(len(masks), words)

    def neighbor_words(self, side: Side) -> np.ndarray:
        return self.nbr_words_left if side == Side.LEFT else self.nbr_words_right

    def side_count(self, side: Side) -> int:
        return self.left_count if side == Side.LEFT else self.right_count

    def neighbors(self, side: Side, index: int) -> tuple[int, ...]:
        """Neighbors of the given vertex, as indices on the opposite side."""
        adj = self.adj_left if side == Side.LEFT else self.adj_right
        return adj[index]

    def neighbor_set(self, side: Side, index: int) -> frozenset[int]:
        sets = self.nbr_sets_left if side == Side.LEFT else self.nbr_sets_right
        return sets[index]

    def degree(self, side: Side, index: int) -> int:
        return len(self.neighbors(side, index))

    def has_edge(self, left: int, right: int) -> bool:
        return right in self.nbr_sets_left[left]

    def density(self) -> float:
        """Average degree: 2|E| / (|L| + |R|). Zero for the empty graph."""
        total = self.left_count + self.right_count
        return 2.0 * self.edge_count / total if total else 0.0

    def induce(
        self, left_vertices: Iterable[int], right_vertices: Iterable[int]
    ) -> "InducedSubgraph":
        return InducedSubgraph(
            parent=self,
            left_vertices=frozenset(left_vertices),
            right_vertices=frozenset(right_vertices),
        )

    def edges(self) -> Iterator[tuple[int, int]]:
        for v, nbrs in enumerate(self.adj_left):
            for u in nbrs:
                yield (v, u)


@dataclass(frozen=True)
class InducedSubgraph:
    """A vertex-induced subgraph, kept as vertex sets over a parent graph."""

    parent: BipartiteGraph
    left_vertices: frozenset[int]
    right_vertices: frozenset[int]

    def __post_init__(self) -> None:
        for v in self.left_vertices:
            if not 0 <= v < self.parent.left_count:
                raise ValueError(f"left vertex {v} not in parent")
        for u in self.right_vertices:
            if not 0 <= u < self.parent.right_count:
                raise ValueError(f"right vertex {u} not in parent")

    @property
    def vertex_count(self) -> int:
        return len(self.left_vertices) + len(self.right_vertices)

    @property
    def is_empty(self) -> bool:
        return not self.left_vertices and not self.right_vertices

    def edge_count(self) -> int:
        total = 0
        for v in self.left_vertices:
            nbrs = self.parent.adj_left[v]
            if len(self.right_vertices) < len(nbrs):
                total += sum(1 for u in self.right_vertices if u in self.parent.nbr_sets_left[v])
            else:
                total += sum(1 for u in nbrs if u in self.right_vertices)
        return total

    def compact(self) -> tuple[BipartiteGraph, tuple[int, ...], tuple[int, ...]]:
        """Reindexes to a standalone graph.

        Returns (graph, left_map, right_map) where left_map[i] is the parent
        index of compact left vertex i; maps are sorted by parent index.
        """
        left_map = tuple(sorted(self.left_vertices))
        right_map = tuple(sorted(self.right_vertices))
        right_pos = {u: j for j, u in enumerate(right_map)}
        edges = []
        for i, v in enumerate(left_map):
            for u in self.parent.adj_left[v]:
                j = right_pos.get(u)
                if j is not None:
                    edges.append((i, j))
        graph = BipartiteGraph.from_edges(len(left_map), len(right_map), edges)
        return graph, left_map, right_map


@dataclass(frozen=True)
class LabeledGraph:
    """A graph plus the original vertex labels from its source file.

    Labels are kept in index order per side, so labels and indices translate
    both ways without extra lookups.
    """

    graph: BipartiteGraph
    left_labels: tuple[str, ...]
    right_labels: tuple[str, ...]

    def label_of(self, side: Side, index: int) -> str:
        labels = self.left_labels if side == Side.LEFT else self.right_labels
        return labels[index]

    def mapping_text(self, side: Side) -> str:
        """Two-column text (index, original label), one vertex per line."""
        labels = self.left_labels if side == Side.LEFT else self.right_labels
        return "\n".join(f"{i}\t{label}" for i, label in enumerate(labels))

    @classmethod
    def without_labels(cls, graph: BipartiteGraph) -> "LabeledGraph":
        return cls(
            graph=graph,
            left_labels=tuple(str(i) for i in range(graph.left_count)),
            right_labels=tuple(str(j) for j in range(graph.right_count)),
        )


def load_edge_list(source: str | Path | IO[str]) -> LabeledGraph:
    """Loads a two-column whitespace-separated edge list.

    The first column holds left-side labels, the second right-side labels;
    the two label spaces are independent. Lines starting with '%' or '#' are
    comments and blank lines are skipped. Labels are mapped to dense indices
    in first-occurrence order. Duplicate edges collapse to one.

    Raises:
        ParseError: on a data line that does not have exactly two tokens
            (carries the 1-based line number).
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as handle:
            return _parse_edge_lines(handle)
    return _parse_edge_lines(source)


def _parse_edge_lines(lines: Iterable[str]) -> LabeledGraph:
    left_index: dict[str, int] = {}
    right_index: dict[str, int] = {}
    edges: list[tuple[int, int]] = []
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("%") or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError(
                f"expected two whitespace-separated tokens, found {len(tokens)}",
                line_no,
            )
        a, b = tokens
        v = left_index.setdefault(a, len(left_index))
        u = right_index.setdefault(b, len(right_index))
        edges.append((v, u))
    graph = BipartiteGraph.from_edges(len(left_index), len(right_index), edges)
    return LabeledGraph(
        graph=graph,
        left_labels=tuple(left_index),
        right_labels=tuple(right_index),
    )


# Below this size the generator materializes the full cell range and samples
# directly; above it, rejection sampling avoids the O(|L|*|R|) allocation.
_SAMPLE_DIRECT_LIMIT = 4_000_000


def generate_er(
    left_count: int, right_count: int, edge_count: int, seed: int
) -> BipartiteGraph:
    """Generates a uniform random bipartite graph with an exact edge count.

    Draws edge_count distinct cells uniformly without replacement from the
    left_count x right_count grid. Deterministic for a fixed seed: repeated
    calls with identical arguments return identical graphs.

    Raises:
        ValueError: if edge_count exceeds left_count * right_count.
    """
    total = left_count * right_count
    if edge_count > total:
        raise ValueError(
            f"edge_count {edge_count} exceeds grid size {left_count}x{right_count}"
        )
    if edge_count < 0:
        raise ValueError("edge_count must be non-negative")
    rng = random.Random(seed)
    if total <= _SAMPLE_DIRECT_LIMIT:
        codes: Iterable[int] = rng.sample(range(total), edge_count)
    else:
        seen: set[int] = set()
        while len(seen) < edge_count:
            seen.add(rng.randrange(total))
        codes = seen
    return BipartiteGraph.from_edges(
        left_count, right_count, (divmod(code, right_count) for code in codes)
    )


def ab_core(graph: BipartiteGraph, alpha: int, beta: int) -> InducedSubgraph:
    """Largest induced subgraph with left degrees >= alpha and right >= beta.

    Computed by iterative peeling: vertices violating their side's floor are
    removed until none remain. The result is unique, so peeling order does
    not matter; alpha = beta = 0 returns the whole graph, isolated vertices
    included.
    """
    alive_left = [True] * graph.left_count
    alive_right = [True] * graph.right_count
    deg_left = [graph.degree(Side.LEFT, v) for v in range(graph.left_count)]
    deg_right = [graph.degree(Side.RIGHT, u) for u in range(graph.right_count)]

    queue: list[VertexRef] = []
    if alpha > 0:
        queue.extend(
            VertexRef(Side.LEFT, v)
            for v in range(graph.left_count)
            if deg_left[v] < alpha
        )
    if beta > 0:
        queue.extend(
            VertexRef(Side.RIGHT, u)
            for u in range(graph.right_count)
            if deg_right[u] < beta
        )
    for ref in queue:
        if ref.side == Side.LEFT:
            alive_left[ref.index] = False
        else:
            alive_right[ref.index] = False

    while queue:
        side, index = queue.pop()
        if side == Side.LEFT:
            for u in graph.adj_left[index]:
                if alive_right[u]:
                    deg_right[u] -= 1
                    if beta > 0 and deg_right[u] < beta:
                        alive_right[u] = False
                        queue.append(VertexRef(Side.RIGHT, u))
        else:
            for v in graph.adj_right[index]:
                if alive_left[v]:
                    deg_left[v] -= 1
                    if alpha > 0 and deg_left[v] < alpha:
                        alive_left[v] = False
                        queue.append(VertexRef(Side.LEFT, v))

    return graph.induce(
        (v for v in range(graph.left_count) if alive_left[v]),
        (u for u in range(graph.right_count) if alive_right[u]),
    )


def two_hop_left(graph: BipartiteGraph, v: int) -> frozenset[int]:
    """Left vertices sharing at least one right neighbor with v.

    Includes v itself whenever v has any neighbor; an isolated v yields the
    empty set.
    """
    nbrs = graph.adj_left[v]
    if not nbrs:
        return frozenset()
    reach: set[int] = set()
    for u in nbrs:
        reach.update(graph.adj_right[u])
    return frozenset(reach)


def max_degree(graph: BipartiteGraph, side: Side) -> int:
    """Largest degree on the given side; zero when the side is empty."""
    count = graph.side_count(side)
    if count == 0:
        return 0
    return max(graph.degree(side, i) for i in range(count))


def side_indices(graph: BipartiteGraph, side: Side) -> range:
    return range(graph.side_count(side))
