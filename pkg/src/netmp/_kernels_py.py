"""Numpy implementations of the hot per-edge kernels.

This module is the fallback backend used when the compiled extension is not
available; `netmp.kernels` picks between the two at import time.  All
functions operate on the CSR-style half-edge layout: directed edges are
grouped by receiver node, `offsets` delimits the blocks, `rev[e]` is the
index of the opposite direction of edge `e`.

The update rule for a directed edge (i <- j) aggregates over the edges in
the block of the sender j, excluding the reverse edge (j <- i).  Exclude-one
products are computed with exact zero bookkeeping rather than plain
division, so configurations with hard zeros (p = 1 percolation, zero SBM
mixing entries) stay correct.
"""
from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def seg_sum(offsets: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Per-block sums; empty blocks yield 0."""
    n = offsets.shape[0] - 1
    out = np.zeros((n,) + values.shape[1:], dtype=values.dtype)
    if values.shape[0]:
        starts = offsets[:-1]
        nz = np.diff(offsets) > 0
        out[nz] = np.add.reduceat(values, starts[nz], axis=0)
    return out


def seg_prod(offsets: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Per-block products; empty blocks yield 1."""
    n = offsets.shape[0] - 1
    out = np.ones((n,) + values.shape[1:], dtype=values.dtype)
    if values.shape[0]:
        starts = offsets[:-1]
        nz = np.diff(offsets) > 0
        out[nz] = np.multiply.reduceat(values, starts[nz], axis=0)
    return out


def excl_prod(offsets: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Exclude-one product within each block.

    out[e] = prod(values[f] for f in block(e), f != e).  Zeros are counted
    per block so the result is exact (no 0/0): with one zero in the block,
    only the zero entry sees the product of the rest; with two or more, every
    exclude-one product is 0.
    """
    counts = np.diff(offsets)
    zero = values == 0
    nonzero_vals = np.where(zero, 1, values)
    prod_nz = np.repeat(seg_prod(offsets, nonzero_vals), counts, axis=0)
    n_zero = np.repeat(seg_sum(offsets, zero.astype(np.int64)), counts, axis=0)
    out = np.where(n_zero == 0, prod_nz / nonzero_vals, np.zeros_like(prod_nz))
    return np.where(zero & (n_zero == 1), prod_nz, out)


def nb_apply(offsets: np.ndarray, sender: np.ndarray, rev: np.ndarray,
             v: np.ndarray) -> np.ndarray:
    """Non-backtracking operator: out[e] = sum of v over successors of e."""
    return seg_sum(offsets, v)[sender] - v[rev]


def percolation_sweep(offsets: np.ndarray, rev: np.ndarray, msgs: np.ndarray,
                      p: float) -> np.ndarray:
    """One synchronous sweep of the edge-percolation message update."""
    vals = 1.0 - p + p * msgs
    return excl_prod(offsets, vals)[rev]


def ising_sweep(offsets: np.ndarray, rev: np.ndarray, msgs: np.ndarray,
                beta: float, log_domain: bool) -> np.ndarray:
    """One synchronous sweep of the pairwise spin message update.

    msgs has shape (2m, 2) with columns (up, down).  The log-domain path is
    safe for beta up to several hundred; the linear path is faster and is
    chosen by the caller when exp(beta * max_degree) cannot overflow.
    """
    if not log_domain:
        eb = np.exp(beta)
        emb = np.exp(-beta)
        terms = msgs @ np.array([[eb, emb], [emb, eb]])
        new = excl_prod(offsets, terms)[rev]
        return new / new.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore"):
        lm = np.log(msgs)
    lterms = np.empty_like(msgs)
    lterms[:, 0] = np.logaddexp(beta + lm[:, 0], -beta + lm[:, 1])
    lterms[:, 1] = np.logaddexp(-beta + lm[:, 0], beta + lm[:, 1])
    counts = np.diff(offsets)
    tot = np.repeat(seg_sum(offsets, lterms), counts, axis=0)
    new_log = (tot - lterms)[rev]
    new_log -= new_log.max(axis=1, keepdims=True)
    new = np.exp(new_log)
    return new / new.sum(axis=1, keepdims=True)


def spectral_sweep(offsets: np.ndarray, rev: np.ndarray, msgs: np.ndarray,
                   inv_z2: complex, eps: float) -> tuple[np.ndarray, int]:
    """One synchronous sweep of the excursion generating-function update.

    Returns (new_msgs, singular_edge); singular_edge is -1 unless some
    denominator has modulus below eps, in which case it is the first
    offending directed edge and new_msgs is undefined there.
    """
    counts = np.diff(offsets)
    tot = np.repeat(seg_sum(offsets, msgs), counts)
    den = 1.0 - (tot - msgs)[rev]
    small = np.abs(den) < eps
    if small.any():
        return msgs, int(np.flatnonzero(small)[0])
    return inv_z2 / den, -1


def jacobi_eigenvalues(a: np.ndarray, target: float, max_sweeps: int) -> np.ndarray:
    """Cyclic threshold Jacobi on a symmetric matrix; returns sorted eigenvalues.

    Used only by the oracle module (`netmp.oracles.dense_spectrum`); lives in
    the kernel backends for the compiled inner loop.  `a` is modified in place.
    """
    n = a.shape[0]
    for _ in range(max_sweeps):
        off = a - np.diag(np.diag(a))
        off_norm = np.sqrt((off * off).sum())
        if off_norm < target:
            return np.sort(np.diag(a))
        skip = off_norm / (2.0 * n)
        for p in range(n - 1):
            row = np.abs(a[p, p + 1:])
            for q in (np.flatnonzero(row > skip) + p + 1):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta >= 0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = 1.0 / (theta - np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rp, rq = a[p].copy(), a[q].copy()
                a[p] = c * rp - s * rq
                a[q] = s * rp + c * rq
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                a[p, q] = a[q, p] = 0.0
    raise RuntimeError("Jacobi iteration did not reach the target off-norm")


def sigma_counts(edges_u: np.ndarray, edges_v: np.ndarray, n_members: int,
                 chunk: int = 1 << 16) -> tuple[np.ndarray, np.ndarray]:
    """Aggregate reachability over all edge configurations of a neighborhood.

    Local node labels: 0 is the evaluation center, members are 1..n_members.
    For each of the 2^k configurations of the k local edges, the set of
    members reachable from node 0 along occupied edges is encoded as a
    bitmask (bit b-1 for member b).  Configurations are histogrammed by
    (mask, occupied count); returns (masks, counts) with counts of shape
    (len(masks), k + 1).
    """
    k = edges_u.shape[0]
    nconf = 1 << k
    bit = np.arange(k, dtype=np.int64)
    keys = []
    key_counts = []
    for lo in range(0, nconf, chunk):
        conf = np.arange(lo, min(lo + chunk, nconf), dtype=np.int64)
        occ = ((conf[:, None] >> bit) & 1).astype(bool)
        reach = np.zeros((conf.shape[0], n_members + 1), dtype=bool)
        reach[:, 0] = True
        while True:
            changed = False
            for e in range(k):
                u, v = edges_u[e], edges_v[e]
                link = occ[:, e]
                upd = link & (reach[:, u] ^ reach[:, v])
                if upd.any():
                    reach[:, u] |= upd
                    reach[:, v] |= upd
                    changed = True
            if not changed:
                break
        mask = (reach[:, 1:] << np.arange(n_members, dtype=np.int64)).sum(axis=1)
        key = mask * (k + 1) + occ.sum(axis=1)
        kk, cc = np.unique(key, return_counts=True)
        keys.append(kk)
        key_counts.append(cc)
    key = np.concatenate(keys)
    cnt = np.concatenate(key_counts)
    ukey, inv = np.unique(key, return_inverse=True)
    acc = np.zeros(ukey.shape[0], dtype=np.int64)
    np.add.at(acc, inv, cnt)
    masks = np.unique(ukey // (k + 1))
    counts = np.zeros((masks.shape[0], k + 1), dtype=np.float64)
    rows = np.searchsorted(masks, ukey // (k + 1))
    counts[rows, ukey % (k + 1)] = acc
    return masks, counts
