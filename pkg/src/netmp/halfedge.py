"""Directed-edge index and the non-backtracking operator.

Every undirected edge {i, j} contributes two directed edges: (i <- j) with
receiver i and sender j.  Directed edges are stored grouped by receiver in
the same order as the graph's CSR layout, so edge e in node i's block has
sender `graph.neighbors[e]`.  The non-backtracking matrix acts implicitly:
(Bv)[i<-j] sums v over the edges (j <- k), k != i.
"""
from __future__ import annotations

import numpy as np

from netmp import kernels
from netmp.errors import ConvergenceError
from netmp.graph import Graph


class HalfEdgeIndex:
    """The 2m directed edges of a graph with reverse and successor structure."""

    __slots__ = ("graph", "offsets", "sender", "receiver", "rev", "n_edges")

    def __init__(self, graph: Graph):
        self.graph = graph
        self.offsets = graph.offsets
        self.sender = graph.neighbors
        self.receiver = np.repeat(
            np.arange(graph.n, dtype=np.int64), np.diff(graph.offsets)
        )
        # directed edges sorted by (receiver, sender); the reverse edge of
        # (i <- j) is located by its composite key (j, i)
        key = self.receiver * graph.n + self.sender
        self.rev = np.searchsorted(key, self.sender * graph.n + self.receiver)
        self.receiver.setflags(write=False)
        self.rev.setflags(write=False)
        self.n_edges = int(self.sender.shape[0])

    def successors(self, e: int) -> np.ndarray:
        """Directed-edge indices (j <- k), k != i, for e = (i <- j)."""
        j = self.sender[e]
        block = np.arange(self.offsets[j], self.offsets[j + 1], dtype=np.int64)
        return block[block != self.rev[e]]

    def dense_matrix(self) -> np.ndarray:
        """Materialize B; meant for small graphs (tests, oracles)."""
        if self.n_edges > 4000:
            raise ValueError("dense non-backtracking matrix capped at 4000 edges")
        b = (self.sender[:, None] == self.receiver[None, :]).astype(np.float64)
        b[np.arange(self.n_edges), self.rev] = 0.0
        return b


def nb_apply(index: HalfEdgeIndex, v: np.ndarray) -> np.ndarray:
    """Multiply the non-backtracking matrix by a length-2m vector."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (index.n_edges,):
        raise ValueError(f"expected vector of length {index.n_edges}, got {v.shape}")
    return kernels.nb_apply(index.offsets, index.sender, index.rev, v)


def nb_leading_eigenvalue(
    index: HalfEdgeIndex, tol: float = 1e-10, max_iter: int = 100_000
) -> float:
    """Leading eigenvalue of B by power iteration from the all-ones vector.

    The vector is L1-normalized each step; the estimate is the norm ratio.
    B is entrywise nonnegative, so the leading eigenvalue is real and >= 0.
    A vanishing iterate (trees: B is nilpotent) returns 0.
    """
    if index.n_edges == 0:
        raise ValueError("graph has no edges")
    v = np.full(index.n_edges, 1.0 / index.n_edges)
    estimate = np.inf
    for _ in range(max_iter):
        w = kernels.nb_apply(index.offsets, index.sender, index.rev, v)
        s = float(w.sum())
        if s == 0.0:
            return 0.0
        if abs(s - estimate) < tol:
            return s
        estimate = s
        v = w / s
    raise ConvergenceError(
        f"power iteration did not settle within {max_iter} steps", estimate
    )
