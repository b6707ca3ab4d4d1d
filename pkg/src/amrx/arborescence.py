"""Maximum spanning arborescence with a fixed root (Chu-Liu-Edmonds)."""
from __future__ import annotations


class NoArborescence(ValueError):
    pass


def max_arborescence(scores, root: int) -> list:
    """Return parent indices (root's parent is -1) of the best-scoring arborescence.

    `scores[h][d]` is the weight of edge h -> d, or None when the edge is
    not allowed. Ties go to the lower-numbered head, so the result is fully
    deterministic.
    """
    n = len(scores)
    edges = []
    for h in range(n):
        for d in range(n):
            if h != d and d != root and scores[h][d] is not None:
                edges.append((h, d, float(scores[h][d]), len(edges)))
    originals = {e[3]: (e[0], e[1]) for e in edges}
    chosen = _solve(list(range(n)), edges, root)
    parents = [-1] * n
    for eid in chosen:
        h, d = originals[eid]
        parents[d] = h
    return parents


def _best_incoming(nodes, edges, root):
    best = {}
    for e in edges:
        h, d, w, _ = e
        if d == root:
            continue
        cur = best.get(d)
        if cur is None or w > cur[2] or (w == cur[2] and (h, e[3]) < (cur[0], cur[3])):
            best[d] = e
    for v in nodes:
        if v != root and v not in best:
            raise NoArborescence(f"node {v} has no incoming edge")
    return best


def _find_cycle(nodes, best, root):
    color = {}
    for start in nodes:
        if start in color:
            continue
        path = []
        v = start
        while v != root and v not in color:
            color[v] = start
            path.append(v)
            v = best[v][0]
        if v != root and color.get(v) == start:
            return path[path.index(v):]
    return None


def _solve(nodes, edges, root):
    """Returns the set of original edge ids of the optimal arborescence."""
    best = _best_incoming(nodes, edges, root)
    cycle = _find_cycle(nodes, best, root)
    if cycle is None:
        return {best[v][3] for v in nodes if v != root}
    in_cycle = set(cycle)
    c = max(nodes) + 1
    new_edges = []
    trace = {}  # new edge id -> original edge consumed when expanding
    for h, d, w, eid in edges:
        if h in in_cycle and d in in_cycle:
            continue
        if d in in_cycle:
            ne = (h, c, w - best[d][2], eid)
            trace[eid] = ("in", d)
        elif h in in_cycle:
            ne = (c, d, w, eid)
            trace[eid] = ("out", d)
        else:
            ne = (h, d, w, eid)
        new_edges.append(ne)
    sub_nodes = [v for v in nodes if v not in in_cycle] + [c]
    chosen = _solve(sub_nodes, new_edges, root)
    result = set(chosen)
    entered = None
    for eid in chosen:
        kind = trace.get(eid)
        if kind and kind[0] == "in":
            entered = kind[1]
    for v in cycle:
        if v != entered:
            result.add(best[v][3])
    return result
