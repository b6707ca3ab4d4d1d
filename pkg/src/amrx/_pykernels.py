"""Pure-Python versions of the compiled kernels in `_kernels.pyx`.

Same signatures, same enumeration order, same tie-breaking: the two backends
return identical mappings and (up to libm rounding) identical EM statistics.
"""
from math import exp, fabs, log


def _tolist(a):
    return a.tolist() if hasattr(a, "tolist") else list(a)


class _Problem:
    __slots__ = ("unary", "edges", "inc", "gold_rel")

    def __init__(self, unary, edges, inc_ptr, inc_idx, gold_rel):
        self.unary = _tolist(unary)
        self.edges = [tuple(e) for e in _tolist(edges)]
        ptr = _tolist(inc_ptr)
        idx = _tolist(inc_idx)
        self.inc = [idx[ptr[p]:ptr[p + 1]] for p in range(len(ptr) - 1)]
        self.gold_rel = _tolist(gold_rel)

    def edge_score(self, e, mapping):
        p1, p2, r = self.edges[e]
        g1 = mapping[p1]
        g2 = mapping[p2]
        if g1 < 0 or g2 < 0:
            return 0
        return self.gold_rel[r][g1][g2]

    def local(self, p1, p2, mapping):
        g = mapping[p1]
        total = self.unary[p1][g] if g >= 0 else 0
        for e in self.inc[p1]:
            total += self.edge_score(e, mapping)
        if p2 >= 0:
            g = mapping[p2]
            total += self.unary[p2][g] if g >= 0 else 0
            for e in self.inc[p2]:
                a, b, _ = self.edges[e]
                other = b if a == p2 else a
                if other != p1:
                    total += self.edge_score(e, mapping)
        return total

    def total(self, mapping):
        s = 0
        for p, g in enumerate(mapping):
            if g >= 0:
                s += self.unary[p][g]
        for e in range(len(self.edges)):
            s += self.edge_score(e, mapping)
        return s


def match_count(unary, edges, mapping, gold_rel):
    n_p = len(unary)
    prob = _Problem(unary, edges, [0] * (n_p + 1), [], gold_rel)
    return prob.total(_tolist(mapping))


def hill_climb(unary, edges, inc_ptr, inc_idx, gold_rel, mapping_in):
    prob = _Problem(unary, edges, inc_ptr, inc_idx, gold_rel)
    n_p = len(prob.unary)
    n_g = len(prob.unary[0]) if n_p else 0
    mapping = [int(x) for x in mapping_in]
    used = [False] * n_g
    for g in mapping:
        if g >= 0:
            used[g] = True
    matched = prob.total(mapping)
    trace = [matched]
    local = prob.local
    while True:
        best_delta, best_kind, best_x, best_y = 0, -1, -1, -1
        for p in range(n_p):
            old = mapping[p]
            before = local(p, -1, mapping)
            for g in range(n_g):
                if used[g]:
                    continue
                mapping[p] = g
                after = local(p, -1, mapping)
                mapping[p] = old
                delta = after - before
                if delta > best_delta:
                    best_delta, best_kind, best_x, best_y = delta, 0, p, g
        for p1 in range(n_p):
            for p2 in range(p1 + 1, n_p):
                a = mapping[p1]
                b = mapping[p2]
                if a == b:
                    continue
                before = local(p1, p2, mapping)
                mapping[p1], mapping[p2] = b, a
                after = local(p1, p2, mapping)
                mapping[p1], mapping[p2] = a, b
                delta = after - before
                if delta > best_delta:
                    best_delta, best_kind, best_x, best_y = delta, 1, p1, p2
        if best_kind < 0:
            break
        if best_kind == 0:
            if mapping[best_x] >= 0:
                used[mapping[best_x]] = False
            mapping[best_x] = best_y
            used[best_y] = True
        else:
            mapping[best_x], mapping[best_y] = mapping[best_y], mapping[best_x]
        matched += best_delta
        trace.append(matched)
    return mapping, matched, trace


def em_estep(link_pid, null_pid, src_len, tgt_len, link_off, tok_off, probs, counts,
             nonnull_mass, diagonal, p0, tension):
    link_pid = _tolist(link_pid)
    null_pid = _tolist(null_pid)
    t = _tolist(probs)
    acc = [0.0] * len(t)
    mass = [0.0] * len(nonnull_mass)
    loglik = 0.0
    emp = 0.0
    for k, (n, m) in enumerate(zip(_tolist(src_len), _tolist(tgt_len))):
        lo = int(link_off[k])
        to = int(tok_off[k])
        for j in range(m):
            base = lo + j * n
            tok = to + j
            if diagonal:
                z = 0.0
                for i in range(n):
                    z += exp(-tension * fabs((i + 1.0) / n - (j + 1.0) / m))
                prior_null = p0
            else:
                prior_null = 1.0 / (n + 1)
            scores = [0.0] * n
            total = 0.0
            for i in range(n):
                if diagonal:
                    w = (1.0 - p0) * exp(-tension * fabs((i + 1.0) / n - (j + 1.0) / m)) / z
                else:
                    w = 1.0 / (n + 1)
                scores[i] = w * t[link_pid[base + i]]
                total += scores[i]
            s_null = prior_null * t[null_pid[tok]]
            total += s_null
            if total <= 0.0:
                mass[tok] = 0.0
                continue
            loglik += log(total)
            for i in range(n):
                w = scores[i] / total
                acc[link_pid[base + i]] += w
                emp += w * -fabs((i + 1.0) / n - (j + 1.0) / m)
            acc[null_pid[tok]] += s_null / total
            mass[tok] = 1.0 - s_null / total
    for i, v in enumerate(acc):
        counts[i] += v
    for i, v in enumerate(mass):
        nonnull_mass[i] = v
    return loglik, emp
