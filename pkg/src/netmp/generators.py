"""Seeded random graph generators.

All generators are deterministic for a fixed seed (numpy PCG64 streams) and
return simple undirected graphs.  Pair sampling uses geometric gap skipping,
so sparse graphs cost O(edges) rather than O(n^2).
"""
from __future__ import annotations

import numpy as np

from netmp.graph import Graph


def _skip_sample(total: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Indices in [0, total) included independently with probability p."""
    if total == 0 or p <= 0.0:
        return np.zeros(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(total, dtype=np.int64)
    log_q = np.log1p(-p)
    out = []
    pos = -1
    batch = max(256, int(total * p * 1.2) + 16)
    while pos < total:
        gaps = np.floor(np.log(rng.random(batch)) / log_q).astype(np.int64) + 1
        hits = pos + np.cumsum(gaps)
        out.append(hits)
        pos = int(hits[-1])
    hits = np.concatenate(out)
    return hits[hits < total]


def _pair_from_index(idx: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Invert the lexicographic enumeration of pairs (i, j), i < j."""
    row_starts = np.arange(n, dtype=np.int64) * n - (
        np.arange(n, dtype=np.int64) * (np.arange(n, dtype=np.int64) + 1)
    ) // 2
    i = np.searchsorted(row_starts, idx, side="right") - 1
    j = idx - row_starts[i] + i + 1
    return i, j


def generate_er(n: int, p: float, seed: int) -> Graph:
    """Erdos-Renyi G(n, p): each pair included independently with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    idx = _skip_sample(n * (n - 1) // 2, p, rng)
    i, j = _pair_from_index(idx, n)
    return Graph(n, zip(i.tolist(), j.tolist()))


def generate_regular(n: int, d: int, seed: int, max_attempts: int = 10_000) -> Graph:
    """Random d-regular simple graph by stub pairing with full restarts.

    A pairing containing a self-loop or duplicate edge is rejected wholesale
    and redrawn, which keeps the distribution unbiased over simple pairings.
    """
    if (n * d) % 2 != 0:
        raise ValueError("n * d must be even")
    if d >= n:
        raise ValueError("degree must be below node count")
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n, dtype=np.int64), d)
    for _ in range(max_attempts):
        perm = rng.permutation(stubs)
        u = np.minimum(perm[0::2], perm[1::2])
        v = np.maximum(perm[0::2], perm[1::2])
        if (u == v).any():
            continue
        key = u * n + v
        if np.unique(key).shape[0] != key.shape[0]:
            continue
        return Graph(n, zip(u.tolist(), v.tolist()))
    raise RuntimeError(f"no simple pairing found in {max_attempts} attempts")


def generate_sbm(
    n: int,
    q: int,
    priors: np.ndarray,
    omega: np.ndarray,
    seed: int,
) -> tuple[Graph, np.ndarray]:
    """Stochastic block model sample plus its planted group labels.

    Labels are drawn from `priors`; each pair (i, j) is connected with
    probability omega[s_i][s_j].
    """
    priors = np.asarray(priors, dtype=np.float64)
    omega = np.asarray(omega, dtype=np.float64)
    if priors.shape != (q,) or abs(priors.sum() - 1.0) > 1e-9 or (priors < 0).any():
        raise ValueError("priors must be a length-q probability vector")
    if omega.shape != (q, q) or not np.allclose(omega, omega.T):
        raise ValueError("omega must be a symmetric q x q matrix")
    if (omega < 0).any() or (omega > 1).any():
        raise ValueError("omega entries must be probabilities")
    rng = np.random.default_rng(seed)
    labels = rng.choice(q, size=n, p=priors)
    groups = [np.flatnonzero(labels == r) for r in range(q)]
    edges: list[tuple[int, int]] = []
    for r in range(q):
        gr = groups[r]
        idx = _skip_sample(gr.shape[0] * (gr.shape[0] - 1) // 2, omega[r, r], rng)
        a, b = _pair_from_index(idx, gr.shape[0])
        edges.extend(zip(gr[a].tolist(), gr[b].tolist()))
        for s in range(r + 1, q):
            gs = groups[s]
            idx = _skip_sample(gr.shape[0] * gs.shape[0], omega[r, s], rng)
            a, b = idx // max(gs.shape[0], 1), idx % max(gs.shape[0], 1)
            edges.extend(zip(gr[a].tolist(), gs[b].tolist()))
    return Graph(n, edges), labels


def generate_triangle_expander(n_base: int, seed: int) -> Graph:
    """Triangle-decorated random cubic graph on 3 * n_base nodes.

    Every node of a random 3-regular base graph becomes a triangle; each base
    edge links two triangle corners, so the result is 3-regular, every node
    sits in exactly one triangle, and all longer cycles stay expander-length.
    Standard message passing treats the triangle corners as independent and
    overshoots the giant cluster; loop corrections at r >= 3 repair it.
    """
    base = generate_regular(n_base, 3, seed)
    edges: list[tuple[int, int]] = []
    for v in range(n_base):
        a, b, c = 3 * v, 3 * v + 1, 3 * v + 2
        edges.extend([(a, b), (a, c), (b, c)])
    slot = {v: 0 for v in range(n_base)}
    for u, v in base.edges():
        u, v = int(u), int(v)
        edges.append((3 * u + slot[u], 3 * v + slot[v]))
        slot[u] += 1
        slot[v] += 1
    return Graph(3 * n_base, edges)


def generate_triangle_mesh(n: int, seed: int, max_degree: int = 5) -> Graph:
    """Triangle-rich test graph grown by edge attachment.

    Starts from one triangle; each new node is glued onto a uniformly random
    existing edge whose endpoints are below the degree cap, closing a new
    triangle.  Girth 3, roughly 2n edges, bounded degree so percolation
    neighborhoods stay small.
    """
    if n < 3:
        raise ValueError("need at least 3 nodes")
    rng = np.random.default_rng(seed)
    edges = [(0, 1), (0, 2), (1, 2)]
    degree = {0: 2, 1: 2, 2: 2}
    for w in range(3, n):
        eligible = [e for e in edges if degree[e[0]] < max_degree and degree[e[1]] < max_degree]
        if not eligible:
            # cap exhausted: glue onto the least-loaded edge instead
            eligible = [min(edges, key=lambda e: (max(degree[e[0]], degree[e[1]]),
                                                  degree[e[0]] + degree[e[1]], e))]
        u, v = eligible[rng.integers(len(eligible))]
        edges.append((u, w))
        edges.append((v, w))
        degree[u] += 1
        degree[v] += 1
        degree[w] = 2
    return Graph(n, edges)
