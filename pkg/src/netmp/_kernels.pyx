# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the per-edge message sweeps.

Mirrors the API of `_kernels_py`; the selector in `netmp.kernels` prefers
this module when the extension built.  Exclude-one products use per-block
prefix/suffix passes, so hard zeros need no special casing.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, log, log1p

cnp.import_array()

BACKEND_NAME = "cython"

ctypedef cnp.int64_t i64
ctypedef cnp.float64_t f64
ctypedef cnp.complex128_t c128

from netmp import _kernels_py as _py


# -- generic segment primitives ---------------------------------------------

def seg_sum(offsets, values):
    """Per-block sums; empty blocks yield 0."""
    if values.ndim == 1 and values.dtype == np.float64:
        return _seg_sum_1d(offsets, values)
    if values.ndim == 2 and values.dtype == np.float64:
        return _seg_sum_2d(offsets, values)
    if values.ndim == 1 and values.dtype == np.complex128:
        return _seg_sum_c(offsets, values)
    return _py.seg_sum(offsets, values)


def seg_prod(offsets, values):
    """Per-block products; empty blocks yield 1."""
    if values.ndim == 1 and values.dtype == np.float64:
        return _seg_prod_1d(offsets, values)
    if values.ndim == 2 and values.dtype == np.float64:
        return _seg_prod_2d(offsets, values)
    return _py.seg_prod(offsets, values)


def excl_prod(offsets, values):
    """Exclude-one product within each block (prefix/suffix, zero-safe)."""
    if values.ndim == 1 and values.dtype == np.float64:
        return _excl_prod_1d(offsets, values)
    if values.ndim == 2 and values.dtype == np.float64:
        return _excl_prod_2d(offsets, values)
    return _py.excl_prod(offsets, values)


def _seg_sum_1d(const i64[::1] offsets, const f64[::1] values):
    cdef Py_ssize_t n = offsets.shape[0] - 1, i, e
    out = np.zeros(n)
    cdef f64[::1] o = out
    cdef f64 acc
    for i in range(n):
        acc = 0.0
        for e in range(offsets[i], offsets[i + 1]):
            acc += values[e]
        o[i] = acc
    return out


def _seg_sum_2d(const i64[::1] offsets, const f64[:, ::1] values):
    cdef Py_ssize_t n = offsets.shape[0] - 1, q = values.shape[1], i, e, r
    out = np.zeros((n, q))
    cdef f64[:, ::1] o = out
    for i in range(n):
        for e in range(offsets[i], offsets[i + 1]):
            for r in range(q):
                o[i, r] += values[e, r]
    return out


def _seg_sum_c(const i64[::1] offsets, const c128[::1] values):
    cdef Py_ssize_t n = offsets.shape[0] - 1, i, e
    out = np.zeros(n, dtype=np.complex128)
    cdef c128[::1] o = out
    cdef double complex acc
    for i in range(n):
        acc = 0.0
        for e in range(offsets[i], offsets[i + 1]):
            acc = acc + values[e]
        o[i] = acc
    return out


def _seg_prod_1d(const i64[::1] offsets, const f64[::1] values):
    cdef Py_ssize_t n = offsets.shape[0] - 1, i, e
    out = np.ones(n)
    cdef f64[::1] o = out
    cdef f64 acc
    for i in range(n):
        acc = 1.0
        for e in range(offsets[i], offsets[i + 1]):
            acc *= values[e]
        o[i] = acc
    return out


def _seg_prod_2d(const i64[::1] offsets, const f64[:, ::1] values):
    cdef Py_ssize_t n = offsets.shape[0] - 1, q = values.shape[1], i, e, r
    out = np.ones((n, q))
    cdef f64[:, ::1] o = out
    for i in range(n):
        for e in range(offsets[i], offsets[i + 1]):
            for r in range(q):
                o[i, r] *= values[e, r]
    return out


def _excl_prod_1d(const i64[::1] offsets, const f64[::1] values):
    cdef Py_ssize_t n = offsets.shape[0] - 1, i, e
    out = np.empty(values.shape[0])
    cdef f64[::1] o = out
    cdef f64 acc
    for i in range(n):
        acc = 1.0
        for e in range(offsets[i], offsets[i + 1]):
            o[e] = acc
            acc *= values[e]
        acc = 1.0
        for e in range(offsets[i + 1] - 1, offsets[i] - 1, -1):
            o[e] *= acc
            acc *= values[e]
    return out


def _excl_prod_2d(const i64[::1] offsets, const f64[:, ::1] values):
    cdef Py_ssize_t n = offsets.shape[0] - 1, q = values.shape[1], i, e, r
    out = np.empty((values.shape[0], q))
    cdef f64[:, ::1] o = out
    cdef f64 acc
    for r in range(q):
        for i in range(n):
            acc = 1.0
            for e in range(offsets[i], offsets[i + 1]):
                o[e, r] = acc
                acc *= values[e, r]
            acc = 1.0
            for e in range(offsets[i + 1] - 1, offsets[i] - 1, -1):
                o[e, r] *= acc
                acc *= values[e, r]
    return out


# -- fused sweeps ------------------------------------------------------------

def nb_apply(const i64[::1] offsets, const i64[::1] sender, const i64[::1] rev, const f64[::1] v):
    cdef Py_ssize_t n = offsets.shape[0] - 1, m2 = v.shape[0], i, e
    tot_arr = np.zeros(n)
    cdef f64[::1] tot = tot_arr
    cdef f64 acc
    for i in range(n):
        acc = 0.0
        for e in range(offsets[i], offsets[i + 1]):
            acc += v[e]
        tot[i] = acc
    out = np.empty(m2)
    cdef f64[::1] o = out
    for e in range(m2):
        o[e] = tot[sender[e]] - v[rev[e]]
    return out


def percolation_sweep(const i64[::1] offsets, const i64[::1] rev, const f64[::1] msgs, double p):
    cdef Py_ssize_t n = offsets.shape[0] - 1, m2 = msgs.shape[0], i, e
    cdef double omp = 1.0 - p
    vals_arr = np.empty(m2)
    cdef f64[::1] vals = vals_arr
    for e in range(m2):
        vals[e] = omp + p * msgs[e]
    excl_arr = _excl_prod_1d(offsets, vals)
    cdef f64[::1] excl = excl_arr
    out = np.empty(m2)
    cdef f64[::1] o = out
    for e in range(m2):
        o[e] = excl[rev[e]]
    return out


def ising_sweep(const i64[::1] offsets, const i64[::1] rev, const f64[:, ::1] msgs, double beta,
                bint log_domain):
    cdef Py_ssize_t n = offsets.shape[0] - 1, m2 = msgs.shape[0], i, e
    cdef double eb, emb, t0, t1, top, tot
    cdef const f64[:, ::1] excl
    out = np.empty((m2, 2))
    cdef f64[:, ::1] o = out
    terms_arr = np.empty((m2, 2))
    cdef f64[:, ::1] terms = terms_arr
    if not log_domain:
        eb = exp(beta)
        emb = exp(-beta)
        for e in range(m2):
            terms[e, 0] = eb * msgs[e, 0] + emb * msgs[e, 1]
            terms[e, 1] = emb * msgs[e, 0] + eb * msgs[e, 1]
        excl = _excl_prod_2d(offsets, terms_arr)
        for e in range(m2):
            t0 = excl[rev[e], 0]
            t1 = excl[rev[e], 1]
            tot = t0 + t1
            o[e, 0] = t0 / tot
            o[e, 1] = t1 / tot
        return out
    # log domain: terms hold log t_r; block-exclusive sums replace products
    for e in range(m2):
        terms[e, 0] = _logaddexp(beta + _safelog(msgs[e, 0]),
                                 -beta + _safelog(msgs[e, 1]))
        terms[e, 1] = _logaddexp(-beta + _safelog(msgs[e, 0]),
                                 beta + _safelog(msgs[e, 1]))
    new_log_arr = np.empty((m2, 2))
    cdef f64[:, ::1] nl = new_log_arr
    for i in range(n):
        t0 = 0.0
        t1 = 0.0
        for e in range(offsets[i], offsets[i + 1]):
            t0 += terms[e, 0]
            t1 += terms[e, 1]
        for e in range(offsets[i], offsets[i + 1]):
            nl[e, 0] = t0 - terms[e, 0]
            nl[e, 1] = t1 - terms[e, 1]
    for e in range(m2):
        t0 = nl[rev[e], 0]
        t1 = nl[rev[e], 1]
        top = t0 if t0 > t1 else t1
        t0 = exp(t0 - top)
        t1 = exp(t1 - top)
        tot = t0 + t1
        o[e, 0] = t0 / tot
        o[e, 1] = t1 / tot
    return out


cdef inline double _safelog(double x):
    if x <= 0.0:
        return -1.0e308
    return log(x)


cdef inline double _logaddexp(double x, double y):
    cdef double d
    if x < y:
        x, y = y, x
    d = y - x
    if d < -745.0:
        return x
    return x + log1p(exp(d))


def spectral_sweep(const i64[::1] offsets, const i64[::1] rev, const c128[::1] msgs,
                   double complex inv_z2, double eps):
    cdef Py_ssize_t n = offsets.shape[0] - 1, m2 = msgs.shape[0], i, e
    tot_arr = np.zeros(n, dtype=np.complex128)
    cdef c128[::1] tot = tot_arr
    cdef double complex acc, den
    for i in range(n):
        acc = 0.0
        for e in range(offsets[i], offsets[i + 1]):
            acc = acc + msgs[e]
        tot[i] = acc
    excl_arr = np.empty(m2, dtype=np.complex128)
    cdef c128[::1] excl = excl_arr
    for i in range(n):
        for e in range(offsets[i], offsets[i + 1]):
            excl[e] = tot[i] - msgs[e]
    out = np.empty(m2, dtype=np.complex128)
    cdef c128[::1] o = out
    cdef Py_ssize_t singular = -1
    for e in range(m2):
        den = 1.0 - excl[rev[e]]
        if den.real * den.real + den.imag * den.imag < eps * eps:
            singular = e
            break
        o[e] = inv_z2 / den
    if singular >= 0:
        return np.asarray(msgs), int(singular)
    return out, -1


def jacobi_eigenvalues(a, double target, int max_sweeps):
    """Cyclic threshold Jacobi on a symmetric matrix; returns sorted eigenvalues.

    Used only by the oracle module; kept here for the compiled inner loop.
    `a` is modified in place.
    """
    cdef f64[:, ::1] m = a
    cdef Py_ssize_t n = m.shape[0], p, q, i, sweep
    cdef double off, skip, apq, theta, t, c, s, tmp_p, tmp_q
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += 2.0 * m[p, q] * m[p, q]
        off = off ** 0.5
        if off < target:
            return np.sort(np.diag(a))
        skip = off / (2.0 * n)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p, q]
                if fabs(apq) <= skip:
                    continue
                theta = (m[q, q] - m[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + (theta * theta + 1.0) ** 0.5)
                else:
                    t = 1.0 / (theta - (theta * theta + 1.0) ** 0.5)
                c = 1.0 / (t * t + 1.0) ** 0.5
                s = t * c
                for i in range(n):
                    tmp_p = m[p, i]
                    tmp_q = m[q, i]
                    m[p, i] = c * tmp_p - s * tmp_q
                    m[q, i] = s * tmp_p + c * tmp_q
                for i in range(n):
                    tmp_p = m[i, p]
                    tmp_q = m[i, q]
                    m[i, p] = c * tmp_p - s * tmp_q
                    m[i, q] = s * tmp_p + c * tmp_q
                m[p, q] = 0.0
                m[q, p] = 0.0
    raise RuntimeError("Jacobi iteration did not reach the target off-norm")


# -- loopy configuration enumeration ----------------------------------------

def sigma_counts(edges_u, edges_v, int n_members):
    """Histogram reachability masks over all 2^k edge configurations."""
    cdef const i64[::1] eu = np.ascontiguousarray(edges_u, dtype=np.int64)
    cdef const i64[::1] ev = np.ascontiguousarray(edges_v, dtype=np.int64)
    cdef int k = eu.shape[0]
    if k > 30:
        raise ValueError("configuration enumeration capped at 30 edges")
    cdef Py_ssize_t nconf = (<Py_ssize_t>1) << k, conf, b
    cdef int nn = n_members + 1, u, v, ru, rv, x
    key_arr = np.empty(nconf, dtype=np.int64)
    cdef i64[::1] key = key_arr
    parent_arr = np.empty(nn, dtype=np.int64)
    cdef i64[::1] parent = parent_arr
    cdef i64 mask
    cdef int pop
    for conf in range(nconf):
        for x in range(nn):
            parent[x] = x
        pop = 0
        for b in range(k):
            if (conf >> b) & 1:
                pop += 1
                u = <int>eu[b]
                v = <int>ev[b]
                while parent[u] != u:
                    parent[u] = parent[parent[u]]
                    u = <int>parent[u]
                while parent[v] != v:
                    parent[v] = parent[parent[v]]
                    v = <int>parent[v]
                if u != v:
                    parent[v] = u
        mask = 0
        for x in range(1, nn):
            u = x
            while parent[u] != u:
                parent[u] = parent[parent[u]]
                u = <int>parent[u]
            ru = u
            v = 0
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = <int>parent[v]
            if ru == v:
                mask |= (<i64>1) << (x - 1)
        key[conf] = mask * (k + 1) + pop
    ukey, counts_raw = np.unique(key_arr, return_counts=True)
    masks = np.unique(ukey // (k + 1))
    counts = np.zeros((masks.shape[0], k + 1), dtype=np.float64)
    rows = np.searchsorted(masks, ukey // (k + 1))
    counts[rows, ukey % (k + 1)] = counts_raw
    return masks, counts
