"""Two-stage AMR parser trained from aligned corpora.

Stage 1 picks, for every token, the graph fragment the token most often
triggered in training (or nothing). Stage 2 attaches the fragments with a
maximum spanning arborescence whose edge weights are log relation counts.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .amralign import NEGATION_TOKENS, AmrAlignment, clean_token
from .arborescence import max_arborescence
from .graph import AmrGraph, Constant, canonical_penman, parse_penman, strip_sense

NONE = "<none>"
MODEL_HEADER = "AMRX-PARSER v1"
HEAD_FIRST = "head-first"
DEP_FIRST = "dep-first"
UNSEEN_EDGE = (":mod", math.log(0.5))
EMPTY_GRAPH = "(a / amr-empty)"
_CONST_PREFIX = "#const:"


@dataclass(frozen=True)
class Fragment:
    """Connected piece of AMR triggered by one token.

    `key` is the canonical text (variables renamed ``x0``, ``x1``... with
    ``x0`` the fragment root), or ``#const:<value>`` for a lone constant.
    """

    key: str
    graph: AmrGraph | None = None
    constant: Constant | None = None

    @classmethod
    def from_key(cls, key: str) -> "Fragment":
        if key.startswith(_CONST_PREFIX):
            return cls(key, constant=Constant(key[len(_CONST_PREFIX):]))
        return cls(key, graph=parse_penman(key))

    @property
    def is_constant(self) -> bool:
        return self.constant is not None

    @property
    def root_label(self) -> str:
        return self.constant.value if self.is_constant else self.graph.concepts[self.graph.root]


@dataclass
class ParserModel:
    concept_lexicon: dict = field(default_factory=dict)  # word -> Counter(fragment key | NONE)
    relation_stats: dict = field(default_factory=dict)  # (head label, dep label) -> Counter((rel, direction))
    root_stats: Counter = field(default_factory=Counter)
    _fragments: dict = field(default_factory=dict, repr=False)
    _concepts: Counter | None = field(default=None, repr=False)

    def fragment(self, key: str) -> Fragment:
        frag = self._fragments.get(key)
        if frag is None:
            frag = self._fragments[key] = Fragment.from_key(key)
        return frag

    def best_entry(self, word: str) -> str | None:
        dist = self.concept_lexicon.get(word)
        if not dist:
            return None
        return min(dist.items(), key=lambda kv: (-kv[1], kv[0]))[0]

    def concept_frequencies(self) -> Counter:
        if self._concepts is None:
            freq = Counter()
            for dist in self.concept_lexicon.values():
                for key, count in dist.items():
                    if key != NONE and not key.startswith(_CONST_PREFIX):
                        freq[self.fragment(key).root_label] += count
            self._concepts = freq
        return self._concepts

    def merge(self, other: "ParserModel") -> "ParserModel":
        """Sum of two models' counts (training is a mergeable counting pass)."""
        out = ParserModel()
        for src in (self, other):
            for w, dist in src.concept_lexicon.items():
                out.concept_lexicon.setdefault(w, Counter()).update(dist)
            for k, dist in src.relation_stats.items():
                out.relation_stats.setdefault(k, Counter()).update(dist)
            out.root_stats.update(src.root_stats)
        return out

    # -- persistence -----------------------------------------------------

    def save(self, path) -> None:
        lines = [MODEL_HEADER, "[lexicon]"]
        for word in sorted(self.concept_lexicon):
            for key, count in sorted(self.concept_lexicon[word].items()):
                lines.append(f"{word}\t{key}\t{count}")
        lines.append("[relations]")
        for (head, dep) in sorted(self.relation_stats):
            for (rel, direction), count in sorted(self.relation_stats[(head, dep)].items()):
                lines.append(f"{head}\t{dep}\t{rel}\t{direction}\t{count}")
        lines.append("[roots]")
        for concept, count in sorted(self.root_stats.items()):
            lines.append(f"{concept}\t{count}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "ParserModel":
        lines = Path(path).read_text(encoding="utf-8").split("\n")
        if not lines or lines[0] != MODEL_HEADER:
            raise ValueError(f"{path}: not a parser model (missing {MODEL_HEADER!r} header)")
        model = cls()
        section = None
        for lineno, line in enumerate(lines[1:], 2):
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1]
                continue
            parts = line.split("\t")
            try:
                if section == "lexicon":
                    word, key, count = parts
                    model.concept_lexicon.setdefault(word, Counter())[key] = int(count)
                elif section == "relations":
                    head, dep, rel, direction, count = parts
                    model.relation_stats.setdefault((head, dep), Counter())[(rel, direction)] = int(count)
                elif section == "roots":
                    concept, count = parts
                    model.root_stats[concept] = int(count)
                else:
                    raise ValueError("content outside a section")
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed model line ({exc})") from None
        return model


# -- training --------------------------------------------------------------

def _fragment_nodes(g: AmrGraph, owned: list, claimed: set, aligned: set):
    """Owned nodes plus unaligned leaf children, reduced to a connected rooted piece."""
    nodes = list(owned)
    members = set(owned)
    for node in owned:
        if isinstance(node, tuple):
            continue
        for edge in g.child_edges(node):
            tgt = edge[2]
            key = edge if isinstance(tgt, Constant) else tgt
            if key in aligned or key in claimed or key in members:
                continue
            if isinstance(tgt, Constant) or not g.child_edges(tgt):
                nodes.append(key)
                members.add(key)
    variables = [n for n in nodes if not isinstance(n, tuple)]
    if not variables:
        return nodes[:1], nodes[0]

    def reach(start):
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for edge in g.child_edges(v):
                tgt = edge[2]
                key = edge if isinstance(tgt, Constant) else tgt
                if key in members and key not in seen:
                    seen.add(key)
                    if not isinstance(key, tuple):
                        stack.append(key)
        return seen

    best_root, best_set = None, None
    for v in variables:
        r = reach(v)
        if best_set is None or len(r) > len(best_set):
            best_root, best_set = v, r
    return [n for n in nodes if n in best_set], best_root


def _fragment_key(g: AmrGraph, nodes: list, root) -> str:
    if isinstance(root, tuple):
        return _CONST_PREFIX + root[2].value
    members = set(nodes)
    concepts = {v: g.concepts[v] for v in nodes if not isinstance(v, tuple)}
    edges = []
    for src, rel, tgt in g.edges:
        if src not in concepts:
            continue
        if isinstance(tgt, Constant):
            if (src, rel, tgt) in members:
                edges.append((src, rel, tgt))
        elif tgt in concepts:
            edges.append((src, rel, tgt))
    sub = AmrGraph(root, concepts, edges)
    return canonical_penman(sub)


def extract_fragments(tokens: Sequence[str], g: AmrGraph, alignment: AmrAlignment) -> tuple:
    """Per-token (fragment key or None, member node keys) and node -> token ownership."""
    addresses = g.addresses()
    owner: dict = {}
    for addr, toks in alignment.entries.items():
        node = addresses.get(addr)
        if node is not None and toks:
            owner[node] = min(toks)
    aligned = set(owner)
    claimed: set = set()
    per_token = []
    node_token: dict = {}
    for t in range(len(tokens)):
        owned = [node for addr, node in addresses.items() if owner.get(node) == t]
        if not owned:
            per_token.append((None, [], None))
            continue
        nodes, root = _fragment_nodes(g, owned, claimed, aligned)
        claimed.update(nodes)
        for n in nodes:
            node_token[n] = t
        per_token.append((_fragment_key(g, nodes, root), nodes, root))
    return per_token, node_token


def train_parser(examples: Iterable) -> ParserModel:
    """Count fragments, cross-fragment relations and root concepts.

    `examples` yields objects with ``target_tokens``, ``graph`` and
    ``alignment`` (e.g. ProjectedExample).
    """
    model = ParserModel()
    n = 0
    for ex in examples:
        n += 1
        add_example(model, ex.target_tokens, ex.graph, ex.alignment)
    if n == 0:
        raise ValueError("empty training corpus")
    return model


def add_example(model: ParserModel, tokens: Sequence[str], g: AmrGraph, alignment: AmrAlignment) -> None:
    per_token, node_token = extract_fragments(tokens, g, alignment)
    roots = {}
    for t, (tok, item) in enumerate(zip(tokens, per_token)):
        word = tok.lower()
        dist = model.concept_lexicon.setdefault(word, Counter())
        if item[0] is None:
            dist[NONE] += 1
        else:
            dist[item[0]] += 1
            roots[t] = model.fragment(item[0]).root_label
    model._concepts = None
    model.root_stats[g.concepts[g.root]] += 1
    for edge in g.edges:
        src, rel, tgt = edge
        dep = edge if isinstance(tgt, Constant) else tgt
        ts, td = node_token.get(src), node_token.get(dep)
        if ts is None or td is None or ts == td:
            continue
        direction = HEAD_FIRST if ts < td else DEP_FIRST
        model.relation_stats.setdefault((roots[ts], roots[td]), Counter())[(rel, direction)] += 1


def non_content_bearing_ratio(model: ParserModel, level: str = "type") -> float:
    """Share of words whose most likely lexicon entry is NONE (by type, or by token)."""
    if level not in ("type", "token"):
        raise ValueError(f"unknown level {level!r}")
    if not model.concept_lexicon:
        return 0.0
    none_types = none_tokens = total_tokens = 0
    for word, dist in model.concept_lexicon.items():
        count = sum(dist.values())
        total_tokens += count
        if model.best_entry(word) == NONE:
            none_types += 1
            none_tokens += count
    if level == "type":
        return none_types / len(model.concept_lexicon)
    return none_tokens / total_tokens if total_tokens else 0.0


# -- parsing ---------------------------------------------------------------

def _reverse_cascade(model: ParserModel, token: str) -> str | None:
    tok = clean_token(token)
    if not tok:
        return None
    freq = model.concept_frequencies()

    def pick(cands):
        if not cands:
            return None
        concept = min(cands, key=lambda c: (-freq[c], c))
        return canonical_penman(AmrGraph("x", {"x": concept}))

    exact = [c for c in freq if strip_sense(c).lower() == tok]
    if exact:
        return pick(exact)
    if len(tok) >= 4:
        prefix = [c for c in freq if len(strip_sense(c)) >= 4 and strip_sense(c).lower()[:4] == tok[:4]]
        if prefix:
            return pick(prefix)
    if tok.isdigit():
        return _CONST_PREFIX + tok
    if tok in NEGATION_TOKENS:
        return _CONST_PREFIX + "-"
    return None


def _relation(model: ParserModel, head: str, dep: str, direction: str):
    """(label, score) for attaching dep under head; unseen pairs get the generic edge."""
    dist = model.relation_stats.get((head, dep))
    if dist:
        pool = {k: c for k, c in dist.items() if k[1] == direction}
        if pool:
            (label, _), count = min(pool.items(), key=lambda kv: (-kv[1], kv[0]))
            return label, math.log(count)
    return UNSEEN_EDGE


class _Namer:
    def __init__(self):
        self.used: Counter = Counter()

    def __call__(self, concept: str) -> str:
        c = concept[:1].lower()
        base = c if "a" <= c <= "z" else "x"
        self.used[base] += 1
        k = self.used[base]
        return base if k == 1 else f"{base}{k}"


def parse_with_alignment(tokens: Sequence[str], model: ParserModel) -> tuple:
    """Parse and also return the token alignment produced as a by-product."""
    instances = []  # (token index, Fragment)
    for t, tok in enumerate(tokens):
        word = tok.lower()
        key = model.best_entry(word) if word in model.concept_lexicon else _reverse_cascade(model, tok)
        if key is None or key == NONE:
            continue
        instances.append((t, model.fragment(key)))
    heads = [k for k, (_, f) in enumerate(instances) if not f.is_constant]
    if not heads:
        return parse_penman(EMPTY_GRAPH), AmrAlignment({})
    root = min(heads, key=lambda k: (-model.root_stats.get(instances[k][1].root_label, 0), instances[k][0]))

    n = len(instances)
    scores = [[None] * n for _ in range(n)]
    labels = {}
    for h in range(n):
        th, fh = instances[h]
        if fh.is_constant:
            continue
        for d in range(n):
            if d == h:
                continue
            td, fd = instances[d]
            label, score = _relation(model, fh.root_label, fd.root_label, HEAD_FIRST if th < td else DEP_FIRST)
            scores[h][d] = score
            labels[(h, d)] = label
    parents = max_arborescence(scores, root)

    namer = _Namer()
    concepts: dict = {}
    edges: list = []
    anchor: dict = {}  # node key in output graph -> token
    attach: list = []  # output-graph attachment point per instance
    for t, frag in instances:
        if frag.is_constant:
            attach.append(frag.constant)
            continue
        rename = {}
        for v in frag.graph.concepts:
            rename[v] = namer(frag.graph.concepts[v])
            concepts[rename[v]] = frag.graph.concepts[v]
            anchor[rename[v]] = t
        for src, rel, tgt in frag.graph.edges:
            if isinstance(tgt, Constant):
                e = (rename[src], rel, tgt)
                anchor[e] = t
            else:
                e = (rename[src], rel, rename[tgt])
            edges.append(e)
        attach.append(rename[frag.graph.root])
    seen = set(edges)
    for d, h in enumerate(parents):
        if h < 0:
            continue
        e = (attach[h], labels[(h, d)], attach[d])
        if e in seen:
            continue  # identical constant already attached to this head
        seen.add(e)
        if isinstance(attach[d], Constant):
            anchor[e] = instances[d][0]
        edges.append(e)
    graph = AmrGraph(attach[root], concepts, edges)
    entries: dict = {}
    for node, addr in graph.node_addresses().items():
        if node in anchor:
            entries[addr] = {anchor[node]}
    return graph, AmrAlignment(entries)


def parse_sentence(tokens: Sequence[str], model: ParserModel) -> AmrGraph:
    return parse_with_alignment(tokens, model)[0]
