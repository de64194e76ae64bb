"""Independent ground-truth implementations used by tests and acceptance.

Everything here is deliberately clean-room: no numerical kernels are shared
with the message-passing modules, so agreement between the two is evidence
rather than tautology.  Simulation uses union-find over sampled edge
configurations; the enumerations are exact sums over spin states, group
assignments, or edge subsets; the eigensolver is an in-repo cyclic Jacobi.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from netmp.graph import Graph


class _UnionFind:
    __slots__ = ("parent", "size")

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


def _largest_cluster_members(n: int, uf: _UnionFind) -> np.ndarray:
    """Boolean membership in the largest cluster of size >= 2.

    Ties go to the cluster containing the smallest node id; a singleton
    largest cluster counts nobody (avoids p -> 0 artifacts).
    """
    roots = np.fromiter((uf.find(i) for i in range(n)), dtype=np.int64, count=n)
    sizes = np.bincount(roots, minlength=n)
    top = sizes.max() if n else 0
    if top < 2:
        return np.zeros(n, dtype=bool)
    winners = sizes[roots] == top
    chosen = roots[int(np.flatnonzero(winners)[0])]
    return roots == chosen


@dataclass(frozen=True)
class SimStats:
    """Monte Carlo percolation summary over independent edge configurations."""

    frequencies: np.ndarray  # per-node membership frequency in the largest cluster
    mean_s: float
    stderr: float
    reps: int
    seed: int


def percolation_sim(graph: Graph, p: float, reps: int, seed: int) -> SimStats:
    """Direct simulation: occupy edges with probability p, track the largest cluster."""
    if graph.n == 0:
        raise ValueError("graph has no nodes")
    if reps < 1:
        raise ValueError("need at least one repetition")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    edges = graph.edges()
    freq = np.zeros(graph.n)
    s_samples = np.empty(reps)
    for rep in range(reps):
        occupied = rng.random(edges.shape[0]) < p
        uf = _UnionFind(graph.n)
        for u, v in edges[occupied]:
            uf.union(int(u), int(v))
        members = _largest_cluster_members(graph.n, uf)
        freq += members
        s_samples[rep] = members.sum() / graph.n
    freq /= reps
    std = float(s_samples.std(ddof=1)) if reps > 1 else 0.0
    return SimStats(freq, float(s_samples.mean()), std / np.sqrt(reps), reps, seed)


def tree_percolation_dp(graph: Graph, p: float) -> np.ndarray:
    """Exact per-node not-in-giant-cluster probabilities on a forest.

    A two-pass dynamic program (leaf-to-root, then root-to-leaf) evaluates
    the cavity products in one deterministic order, independently of
    fixed-point iteration.  Raises on cyclic input.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    n = graph.n
    parent = np.full(n, -2, dtype=np.int64)
    order: list[int] = []
    for root in range(n):
        if parent[root] != -2:
            continue
        parent[root] = -1
        queue = [root]
        while queue:
            x = queue.pop()
            order.append(x)
            for y in graph.neighbors_of(x):
                y = int(y)
                if y == parent[x]:
                    continue
                if parent[y] != -2:
                    raise ValueError("input graph contains a cycle")
                parent[y] = x
                queue.append(y)
    # upward: message a node sends to its parent
    up = {}
    for x in reversed(order):
        prod = 1.0
        for y in graph.neighbors_of(x):
            y = int(y)
            if y != parent[x]:
                prod *= 1.0 - p + p * up[(x, y)]
        if parent[x] >= 0:
            up[(parent[x], x)] = prod
    # downward: message a node receives from its parent
    for x in order:
        for y in graph.neighbors_of(x):
            y = int(y)
            if y == parent[x]:
                continue
            prod = 1.0
            for z in graph.neighbors_of(x):
                z = int(z)
                if z != y:
                    prod *= 1.0 - p + p * up[(x, z)]
            up[(y, x)] = prod
    mu = np.ones(n)
    for x in range(n):
        for y in graph.neighbors_of(x):
            mu[x] *= 1.0 - p + p * up[(x, int(y))]
    return mu


def _logsumexp(values: np.ndarray) -> float:
    top = values.max()
    return float(top + np.log(np.exp(values - top).sum()))


def ising_enumerate(graph: Graph, beta: float) -> tuple[float, np.ndarray]:
    """Exact log partition function and spin marginals by summing all 2^n states.

    Returns (log_z, marginals) with marginals[i] = (P[s_i=+1], P[s_i=-1]).
    """
    n = graph.n
    if n > 20:
        raise ValueError("exact enumeration capped at 20 nodes")
    states = np.arange(1 << n, dtype=np.int64)
    agree = np.zeros(1 << n, dtype=np.int64)
    for u, v in graph.edges():
        disagree = ((states >> int(u)) ^ (states >> int(v))) & 1
        agree += 1 - 2 * disagree
    log_w = beta * agree.astype(np.float64)
    log_z = _logsumexp(log_w)
    marginals = np.empty((n, 2))
    for i in range(n):
        down = ((states >> i) & 1).astype(bool)
        marginals[i, 0] = np.exp(_logsumexp(log_w[~down]) - log_z)
        marginals[i, 1] = np.exp(_logsumexp(log_w[down]) - log_z)
    return log_z, marginals


def dense_spectrum(graph: Graph, tol_factor: float = 1e-10,
                   max_sweeps: int = 100) -> np.ndarray:
    """All adjacency eigenvalues via cyclic Jacobi rotations, ascending.

    Runs threshold-cyclic sweeps until the off-diagonal Frobenius norm drops
    below tol_factor times the matrix norm.  The rotation loop is the
    in-repo Jacobi routine from the kernel backends; no message-passing
    module touches it, so the comparison stays an independent check.
    """
    from netmp import kernels

    n = graph.n
    if n > 2000:
        raise ValueError("dense spectrum capped at 2000 nodes")
    a = np.zeros((n, n))
    e = graph.edges()
    a[e[:, 0], e[:, 1]] = 1.0
    a[e[:, 1], e[:, 0]] = 1.0
    norm = np.sqrt((a * a).sum())
    if norm == 0.0:
        return np.zeros(n)
    return kernels.jacobi_eigenvalues(a, tol_factor * norm, max_sweeps)


def sbm_posterior_enumerate(graph: Graph, priors: np.ndarray,
                            omega: np.ndarray) -> np.ndarray:
    """Exact group posterior marginals by summing over all q^n assignments.

    The weight of an assignment is the full generative probability: priors
    for every node, omega factors for edges, (1 - omega) for non-edges.
    """
    priors = np.asarray(priors, dtype=np.float64)
    omega = np.asarray(omega, dtype=np.float64)
    q = priors.shape[0]
    n = graph.n
    if q ** n > 1_000_000:
        raise ValueError("assignment enumeration capped at 10^6 states")
    assign = np.stack(
        np.unravel_index(np.arange(q ** n), (q,) * n), axis=0
    )  # (n, q^n)
    weights = np.ones(q ** n)
    for i in range(n):
        weights *= priors[assign[i]]
    adj = np.zeros((n, n), dtype=bool)
    e = graph.edges()
    if e.shape[0]:
        adj[e[:, 0], e[:, 1]] = True
        adj[e[:, 1], e[:, 0]] = True
    for i in range(n):
        for j in range(i + 1, n):
            pair = omega[assign[i], assign[j]]
            weights *= pair if adj[i, j] else 1.0 - pair
    total = weights.sum()
    if total <= 0.0:
        raise ValueError("posterior has zero mass under these parameters")
    marginals = np.empty((n, q))
    for i in range(n):
        for r in range(q):
            marginals[i, r] = weights[assign[i] == r].sum() / total
    return marginals


def brute_percolation_table(graph: Graph) -> np.ndarray:
    """Largest-cluster membership per node, histogrammed by occupied-edge count.

    Returns an (m + 1, n) table T with T[c, i] = number of c-edge
    configurations in which node i belongs to the largest cluster (size >= 2,
    ties to the smallest node id).  Any occupation probability can then be
    evaluated as a polynomial without repeating the 2^m enumeration.
    """
    edges = graph.edges()
    m = edges.shape[0]
    if m > 20:
        raise ValueError("exact percolation enumeration capped at 20 edges")
    table = np.zeros((m + 1, graph.n))
    for mask in range(1 << m):
        uf = _UnionFind(graph.n)
        count = 0
        for e in range(m):
            if (mask >> e) & 1:
                uf.union(int(edges[e, 0]), int(edges[e, 1]))
                count += 1
        table[count] += _largest_cluster_members(graph.n, uf)
    return table


def brute_percolation_enumerate(graph: Graph, p: float,
                                table: np.ndarray | None = None) -> tuple[np.ndarray, float]:
    """Exact expected largest-cluster membership per node, and its mean S."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if table is None:
        table = brute_percolation_table(graph)
    m = table.shape[0] - 1
    c = np.arange(m + 1, dtype=np.float64)
    weights = p ** c * (1.0 - p) ** (m - c)  # 0**0 == 1 covers p in {0, 1}
    freq = weights @ table
    return freq, float(freq.mean())
