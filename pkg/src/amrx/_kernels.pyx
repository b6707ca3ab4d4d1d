# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. `_pykernels` mirrors every function here line for line."""

from libc.math cimport exp, log, fabs
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline int _edge_score(int e, int[:, :] edges, int[:] mapping, unsigned char[:, :, :] gold_rel) noexcept nogil:
    cdef int g1 = mapping[edges[e, 0]]
    cdef int g2 = mapping[edges[e, 1]]
    if g1 < 0 or g2 < 0:
        return 0
    return gold_rel[edges[e, 2], g1, g2]


cdef inline int _unary(int[:, :] unary, int p, int g) noexcept nogil:
    if g < 0:
        return 0
    return unary[p, g]


cdef int _local(int p1, int p2, int[:, :] unary, int[:, :] edges, int[:] inc_ptr, int[:] inc_idx,
                int[:] mapping, unsigned char[:, :, :] gold_rel) noexcept nogil:
    # score of everything touching p1 (and p2 when p2 >= 0), each edge once
    cdef int total = _unary(unary, p1, mapping[p1])
    cdef int k, e, other
    for k in range(inc_ptr[p1], inc_ptr[p1 + 1]):
        total += _edge_score(inc_idx[k], edges, mapping, gold_rel)
    if p2 >= 0:
        total += _unary(unary, p2, mapping[p2])
        for k in range(inc_ptr[p2], inc_ptr[p2 + 1]):
            e = inc_idx[k]
            other = edges[e, 1] if edges[e, 0] == p2 else edges[e, 0]
            if other != p1:
                total += _edge_score(e, edges, mapping, gold_rel)
    return total


def match_count(int[:, :] unary, int[:, :] edges, int[:] mapping, unsigned char[:, :, :] gold_rel):
    cdef int total = 0
    cdef int p, e
    for p in range(mapping.shape[0]):
        total += _unary(unary, p, mapping[p])
    for e in range(edges.shape[0]):
        total += _edge_score(e, edges, mapping, gold_rel)
    return total


def hill_climb(int[:, :] unary, int[:, :] edges, int[:] inc_ptr, int[:] inc_idx,
               unsigned char[:, :, :] gold_rel, mapping_in):
    """Steepest-ascent search from `mapping_in`; returns (mapping, matched, trace)."""
    cdef int n_p = unary.shape[0]
    cdef int n_g = unary.shape[1]
    cdef cnp.ndarray[int, ndim=1] mapping_arr = np.array(mapping_in, dtype=np.intc)
    cdef int[:] mapping = mapping_arr
    cdef cnp.ndarray[unsigned char, ndim=1] used_arr = np.zeros(max(n_g, 1), dtype=np.uint8)
    cdef unsigned char[:] used = used_arr
    cdef int p, g, p1, p2, old, a, b, before, after, delta
    cdef int best_delta, best_kind, best_x, best_y
    cdef int matched
    for p in range(n_p):
        if mapping[p] >= 0:
            used[mapping[p]] = 1
    matched = match_count(unary, edges, mapping, gold_rel)
    trace = [matched]
    while True:
        best_delta = 0
        best_kind = -1
        best_x = -1
        best_y = -1
        for p in range(n_p):
            old = mapping[p]
            before = _local(p, -1, unary, edges, inc_ptr, inc_idx, mapping, gold_rel)
            for g in range(n_g):
                if used[g]:
                    continue
                mapping[p] = g
                after = _local(p, -1, unary, edges, inc_ptr, inc_idx, mapping, gold_rel)
                mapping[p] = old
                delta = after - before
                if delta > best_delta:
                    best_delta = delta
                    best_kind = 0
                    best_x = p
                    best_y = g
        for p1 in range(n_p):
            for p2 in range(p1 + 1, n_p):
                a = mapping[p1]
                b = mapping[p2]
                if a == b:
                    continue
                before = _local(p1, p2, unary, edges, inc_ptr, inc_idx, mapping, gold_rel)
                mapping[p1] = b
                mapping[p2] = a
                after = _local(p1, p2, unary, edges, inc_ptr, inc_idx, mapping, gold_rel)
                mapping[p1] = a
                mapping[p2] = b
                delta = after - before
                if delta > best_delta:
                    best_delta = delta
                    best_kind = 1
                    best_x = p1
                    best_y = p2
        if best_kind < 0:
            break
        if best_kind == 0:
            if mapping[best_x] >= 0:
                used[mapping[best_x]] = 0
            mapping[best_x] = best_y
            used[best_y] = 1
        else:
            a = mapping[best_x]
            mapping[best_x] = mapping[best_y]
            mapping[best_y] = a
        matched += best_delta
        trace.append(matched)
    return [int(x) for x in mapping_arr], matched, trace


def em_estep(long[:] link_pid, long[:] null_pid, long[:] src_len, long[:] tgt_len,
             long[:] link_off, long[:] tok_off, double[:] probs, double[:] counts,
             double[:] nonnull_mass, bint diagonal, double p0, double tension):
    """Accumulate expected link counts into `counts`; returns (loglik, emp_feat)."""
    cdef Py_ssize_t k, i, j, n, m, base, tok
    cdef double loglik = 0.0
    cdef double emp = 0.0
    cdef double z, prior_null, total, s_null, w, h
    cdef cnp.ndarray[double, ndim=1] scores_arr = np.zeros(max(1, int(np.max(src_len)) if src_len.shape[0] else 1))
    cdef double[:] scores = scores_arr
    for k in range(src_len.shape[0]):
        n = src_len[k]
        m = tgt_len[k]
        for j in range(m):
            base = link_off[k] + j * n
            tok = tok_off[k] + j
            if diagonal:
                z = 0.0
                for i in range(n):
                    z += exp(-tension * fabs((i + 1.0) / n - (j + 1.0) / m))
                prior_null = p0
            else:
                prior_null = 1.0 / (n + 1)
            total = 0.0
            for i in range(n):
                if diagonal:
                    w = (1.0 - p0) * exp(-tension * fabs((i + 1.0) / n - (j + 1.0) / m)) / z
                else:
                    w = 1.0 / (n + 1)
                scores[i] = w * probs[link_pid[base + i]]
                total += scores[i]
            s_null = prior_null * probs[null_pid[tok]]
            total += s_null
            if total <= 0.0:
                nonnull_mass[tok] = 0.0
                continue
            loglik += log(total)
            for i in range(n):
                w = scores[i] / total
                counts[link_pid[base + i]] += w
                h = -fabs((i + 1.0) / n - (j + 1.0) / m)
                emp += w * h
            counts[null_pid[tok]] += s_null / total
            nonnull_mass[tok] = 1.0 - s_null / total
    return loglik, emp
