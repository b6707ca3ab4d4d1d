"""Smatch: triple-overlap F1 under the best one-to-one variable mapping.

The search is hill climbing with restarts (run 0 starts from a greedy
concept match, later runs from seeded random injections). The climbing loop
itself lives in `amrx.kernels`. `brute_force_oracle` gives the exact optimum
for small graphs and shares no code with the climber.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .graph import AmrGraph, Constant, extract_triples

DEFAULT_RESTARTS = 4
ORACLE_MAX_VARIABLES = 8


@dataclass(frozen=True)
class SmatchResult:
    precision: float
    recall: float
    f1: float
    matched: int
    gold_total: int
    pred_total: int
    mapping: dict = field(default_factory=dict)  # pred var -> gold var
    pairs: tuple = ()  # per-pair results for corpus scores

    @classmethod
    def from_counts(cls, matched, pred_total, gold_total, mapping=None, pairs=()):
        p = matched / pred_total if pred_total else 0.0
        r = matched / gold_total if gold_total else 0.0
        f = 2 * p * r / (p + r) if p + r > 0 else 0.0
        return cls(p, r, f, matched, gold_total, pred_total, dict(mapping or {}), tuple(pairs))


def _ordered_variables(g: AmrGraph) -> list:
    out = []
    for node in g.addresses().values():
        if isinstance(node, str):
            out.append(node)
    return out


class _Encoded:
    """Integer encoding of a (pred, gold) pair for the kernels."""

    def __init__(self, pred: AmrGraph, gold: AmrGraph):
        self.pvars = _ordered_variables(pred)
        self.gvars = _ordered_variables(gold)
        pidx = {v: i for i, v in enumerate(self.pvars)}
        gidx = {v: i for i, v in enumerate(self.gvars)}
        n_p, n_g = len(self.pvars), len(self.gvars)

        unary = np.zeros((n_p, n_g), dtype=np.intc)
        for i, pv in enumerate(self.pvars):
            pc = pred.concepts[pv]
            for j, gv in enumerate(self.gvars):
                if gold.concepts[gv] == pc:
                    unary[i, j] += 1
        proot, groot = pidx[pred.root], gidx[gold.root]
        if pred.concepts[pred.root] == gold.concepts[gold.root]:
            unary[proot, groot] += 1

        def split(g, idx):
            attrs = [set() for _ in idx]
            loops = [set() for _ in idx]
            rels = []
            for src, rel, tgt in g.edges:
                if isinstance(tgt, Constant):
                    attrs[idx[src]].add((rel, tgt.value))
                elif tgt == src:
                    loops[idx[src]].add(rel)
                else:
                    rels.append((idx[src], idx[tgt], rel))
            return attrs, loops, rels

        pattrs, ploops, prels = split(pred, pidx)
        gattrs, gloops, grels = split(gold, gidx)
        for i in range(n_p):
            for j in range(n_g):
                unary[i, j] += len(pattrs[i] & gattrs[j]) + len(ploops[i] & gloops[j])

        labels = sorted({r for _, _, r in prels} & {r for _, _, r in grels})
        lid = {r: k for k, r in enumerate(labels)}
        gold_rel = np.zeros((max(len(labels), 1), max(n_g, 1), max(n_g, 1)), dtype=np.uint8)
        for a, b, r in grels:
            if r in lid:
                gold_rel[lid[r], a, b] = 1
        edges = [(a, b, lid[r]) for a, b, r in prels if r in lid]
        self.edges = np.array(edges, dtype=np.intc).reshape(-1, 3)
        incident = [[] for _ in range(n_p)]
        for e, (a, b, _) in enumerate(edges):
            incident[a].append(e)
            incident[b].append(e)
        self.inc_ptr = np.zeros(n_p + 1, dtype=np.intc)
        self.inc_ptr[1:] = np.cumsum([len(x) for x in incident])
        self.inc_idx = np.array([e for x in incident for e in x], dtype=np.intc)
        self.unary = unary
        self.gold_rel = gold_rel
        self.pred_total = len(extract_triples(pred))
        self.gold_total = len(extract_triples(gold))
        self.pred = pred
        self.gold = gold

    def greedy_start(self) -> list:
        """Identical concepts paired first, both sides in address order."""
        used = set()
        mapping = []
        for pv in self.pvars:
            pick = -1
            pc = self.pred.concepts[pv]
            for j, gv in enumerate(self.gvars):
                if j not in used and self.gold.concepts[gv] == pc:
                    pick = j
                    break
            if pick >= 0:
                used.add(pick)
            mapping.append(pick)
        return mapping

    def random_start(self, rng: random.Random) -> list:
        perm = list(range(len(self.gvars)))
        rng.shuffle(perm)
        return [perm[i] if i < len(perm) else -1 for i in range(len(self.pvars))]

    def climb(self, start, backend=None):
        impl = backend or kernels
        return impl.hill_climb(self.unary, self.edges, self.inc_ptr, self.inc_idx, self.gold_rel,
                               np.asarray(start, dtype=np.intc))

    def as_mapping(self, mapping) -> dict:
        return {self.pvars[i]: self.gvars[g] for i, g in enumerate(mapping) if g >= 0}


def smatch_score(pred: AmrGraph, gold: AmrGraph, restarts: int = DEFAULT_RESTARTS, seed: int = 0,
                 backend=None) -> SmatchResult:
    """Best Smatch over `restarts` hill-climbing runs; deterministic in (restarts, seed)."""
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    enc = _Encoded(pred, gold)
    rng = random.Random(seed)
    ceiling = min(enc.pred_total, enc.gold_total)
    best_matched, best_map = -1, None
    for run in range(restarts):
        start = enc.greedy_start() if run == 0 else enc.random_start(rng)
        mapping, matched, _ = enc.climb(start, backend)
        if matched > best_matched:
            best_matched, best_map = matched, mapping
        if best_matched >= ceiling:
            break
    return SmatchResult.from_counts(best_matched, enc.pred_total, enc.gold_total, enc.as_mapping(best_map))


def climb_trace(pred: AmrGraph, gold: AmrGraph, start=None, backend=None) -> list:
    """Matched count after every accepted move of one run (from the greedy start by default)."""
    enc = _Encoded(pred, gold)
    _, _, trace = enc.climb(enc.greedy_start() if start is None else start, backend)
    return list(trace)


def smatch_corpus(preds: Sequence[AmrGraph], golds: Sequence[AmrGraph], restarts: int = DEFAULT_RESTARTS,
                  seed: int = 0) -> SmatchResult:
    """Micro-averaged Smatch; per-pair results are kept in ``pairs``."""
    if len(preds) != len(golds):
        raise ValueError(f"corpus length mismatch: {len(preds)} predicted vs {len(golds)} gold graphs")
    if not preds:
        raise ValueError("empty corpus")
    pairs = [smatch_score(p, g, restarts, seed) for p, g in zip(preds, golds)]
    return combine(pairs)


def combine(pairs: Sequence[SmatchResult]) -> SmatchResult:
    if not pairs:
        raise ValueError("empty corpus")
    matched = sum(r.matched for r in pairs)
    pred_total = sum(r.pred_total for r in pairs)
    gold_total = sum(r.gold_total for r in pairs)
    return SmatchResult.from_counts(matched, pred_total, gold_total, pairs=pairs)


def brute_force_oracle(pred: AmrGraph, gold: AmrGraph) -> SmatchResult:
    """Exact optimum by exhaustive search over injective variable mappings.

    Every variable of the smaller graph is mapped (extending a mapping never
    loses a match), with a simple remaining-triples bound for pruning.
    """
    pvars, gvars = list(pred.concepts), list(gold.concepts)
    if min(len(pvars), len(gvars)) > ORACLE_MAX_VARIABLES:
        raise ValueError(f"oracle limited to graphs with at most {ORACLE_MAX_VARIABLES} variables on one side")
    ptrip, gtrip = extract_triples(pred), extract_triples(gold)
    flipped = len(pvars) > len(gvars)
    small_vars, large_vars = (gvars, pvars) if flipped else (pvars, gvars)
    small_trip, large_trip = (gtrip, ptrip) if flipped else (ptrip, gtrip)

    order = {v: k for k, v in enumerate(small_vars)}

    def variables_of(t):
        s, r, o = t
        vs = [s]
        if r not in ("instance", "TOP") and not isinstance(o, Constant):
            vs.append(o)
        return vs

    by_depth = [[] for _ in small_vars]
    for t in small_trip:
        by_depth[max(order[v] for v in variables_of(t))].append(t)
    remaining_after = [0] * (len(small_vars) + 1)
    for d in range(len(small_vars) - 1, -1, -1):
        remaining_after[d] = remaining_after[d + 1] + len(by_depth[d])

    def image(t, f):
        s, r, o = t
        if r in ("instance", "TOP") or isinstance(o, Constant):
            return (f[s], r, o)
        return (f[s], r, f[o])

    best = [-1, None]
    f: dict = {}
    used: set = set()

    def search(depth, score):
        if score + remaining_after[depth] <= best[0]:
            return
        if depth == len(small_vars):
            best[0], best[1] = score, dict(f)
            return
        v = small_vars[depth]
        for w in large_vars:
            if w in used:
                continue
            f[v] = w
            used.add(w)
            gained = sum(1 for t in by_depth[depth] if image(t, f) in large_trip)
            search(depth + 1, score + gained)
            used.discard(w)
            del f[v]

    search(0, 0)
    mapping = {b: a for a, b in best[1].items()} if flipped else best[1]
    return SmatchResult.from_counts(best[0], len(ptrip), len(gtrip), mapping)
