"""Immutable sparse undirected simple graphs.

Adjacency is stored in a CSR-style layout: `offsets` (length n+1) delimits
each node's sorted neighbor list inside `neighbors` (length 2m).  Graphs are
frozen after construction; every algorithm in the package takes them
read-only.
"""
from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from netmp.errors import GraphParseError


@dataclass(frozen=True)
class LoadStats:
    """Counts of input lines dropped while building a graph."""

    self_loops_dropped: int = 0
    duplicates_dropped: int = 0


class Graph:
    """Undirected simple graph with nodes 0..n-1."""

    __slots__ = ("n", "m", "offsets", "neighbors")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        pairs = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if pairs.shape[0]:
            if pairs.min() < 0:
                raise ValueError("negative node id")
            if pairs.max() >= n:
                raise ValueError("edge endpoint beyond node count")
            u = np.minimum(pairs[:, 0], pairs[:, 1])
            v = np.maximum(pairs[:, 0], pairs[:, 1])
            if (u == v).any():
                raise ValueError("self-loop in edge set")
            key = np.unique(u * n + v)
            u, v = key // n, key % n
        else:
            u = v = np.zeros(0, dtype=np.int64)
        self.n = int(n)
        self.m = int(u.shape[0])
        src = np.concatenate([u, v])
        dst = np.concatenate([v, u])
        order = np.lexsort((dst, src))
        neighbors = np.ascontiguousarray(dst[order])
        deg = np.bincount(src, minlength=n)
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(deg, out=offsets[1:])
        offsets.setflags(write=False)
        neighbors.setflags(write=False)
        self.offsets = offsets
        self.neighbors = neighbors

    # -- accessors --------------------------------------------------------

    def degree(self) -> np.ndarray:
        return np.diff(self.offsets)

    def neighbors_of(self, i: int) -> np.ndarray:
        return self.neighbors[self.offsets[i]:self.offsets[i + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        blk = self.neighbors_of(u)
        k = np.searchsorted(blk, v)
        return bool(k < blk.shape[0] and blk[k] == v)

    def edges(self) -> np.ndarray:
        """(m, 2) array of edges with min endpoint first, sorted."""
        src = np.repeat(np.arange(self.n), np.diff(self.offsets))
        keep = src < self.neighbors
        return np.column_stack([src[keep], self.neighbors[keep]])

    def relabeled(self, perm: np.ndarray) -> "Graph":
        """Graph with node i renamed perm[i]."""
        perm = np.asarray(perm, dtype=np.int64)
        e = self.edges()
        return Graph(self.n, zip(perm[e[:, 0]], perm[e[:, 1]]))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def load_edge_list(text: str | Iterable[str]) -> tuple[Graph, LoadStats]:
    """Parse a line-oriented edge list.

    Each non-comment line holds two non-negative integers; `#` starts a
    comment.  Duplicate lines (either orientation) collapse to one edge and
    self-loops are dropped; both are counted in the returned stats.  Empty
    input gives the empty graph (n = 0).
    """
    lines = text.splitlines() if isinstance(text, str) else text
    seen: set[tuple[int, int]] = set()
    self_loops = 0
    duplicates = 0
    top = -1
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphParseError(lineno, f"expected two fields, got {len(parts)}")
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphParseError(lineno, f"malformed token in {line!r}") from None
        if a < 0 or b < 0:
            raise GraphParseError(lineno, "negative node id")
        top = max(top, a, b)
        if a == b:
            self_loops += 1
            continue
        edge = (min(a, b), max(a, b))
        if edge in seen:
            duplicates += 1
        else:
            seen.add(edge)
    graph = Graph(top + 1, sorted(seen))
    return graph, LoadStats(self_loops, duplicates)


def edge_list_text(graph: Graph) -> str:
    """Canonical edge-list export: `u v` per line, u < v, sorted.

    Round-trips byte-exactly through `load_edge_list` (up to trailing
    isolated nodes, which the text format cannot represent).
    """
    return "".join(f"{u} {v}\n" for u, v in graph.edges())


@dataclass(frozen=True)
class ComponentResult:
    """Connected components: labels are dense, assigned in order of the
    smallest node id each component contains (so ties in size are broken
    toward the component holding the smallest node)."""

    labels: np.ndarray
    sizes: np.ndarray

    @property
    def largest(self) -> int:
        order = np.argsort(-self.sizes, kind="stable")
        return int(order[0]) if self.sizes.shape[0] else -1


def components(graph: Graph) -> ComponentResult:
    """Label connected components by iterative traversal."""
    labels = np.full(graph.n, -1, dtype=np.int64)
    sizes = []
    for start in range(graph.n):
        if labels[start] >= 0:
            continue
        label = len(sizes)
        stack = [start]
        labels[start] = label
        size = 0
        while stack:
            x = stack.pop()
            size += 1
            for y in graph.neighbors_of(x):
                if labels[y] < 0:
                    labels[y] = label
                    stack.append(int(y))
        sizes.append(size)
    return ComponentResult(labels, np.asarray(sizes, dtype=np.int64))
