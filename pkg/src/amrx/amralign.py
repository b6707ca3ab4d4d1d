"""Rule-based alignment of AMR nodes to sentence tokens.

Nodes are identified by their NodeAddress strings so that alignments survive
variable renaming and can be written next to the corpus.
"""
from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from typing import Sequence

from .graph import AmrGraph, Constant, strip_sense

NEGATION_TOKENS = frozenset({"no", "not", "non", "never"})
ENTITY_TEMPLATES = frozenset({"date-entity", "name"})


@dataclass(frozen=True)
class AmrAlignment:
    """Node address -> set of token indices."""

    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {a: frozenset(t) for a, t in self.entries.items() if t}
        object.__setattr__(self, "entries", dict(sorted(clean.items(), key=lambda kv: _addr_key(kv[0]))))

    def tokens_of(self, address: str) -> frozenset:
        return self.entries.get(address, frozenset())

    def by_token(self) -> dict:
        """Inverse view: token index -> set of node addresses."""
        inv: dict = {}
        for addr, toks in self.entries.items():
            for t in toks:
                inv.setdefault(t, set()).add(addr)
        return {t: frozenset(s) for t, s in sorted(inv.items())}

    def spans(self, address: str) -> list:
        """Maximal runs of consecutive token indices, as inclusive (start, end)."""
        out = []
        for t in sorted(self.tokens_of(address)):
            if out and out[-1][1] == t - 1:
                out[-1][1] = t
            else:
                out.append([t, t])
        return [tuple(s) for s in out]

    def check_bounds(self, n_tokens: int) -> None:
        for addr, toks in self.entries.items():
            for t in toks:
                if not 0 <= t < n_tokens:
                    raise IndexError(f"token index {t} of node {addr} outside sentence of length {n_tokens}")

    def format(self, sep: str = "|") -> str:
        """``addr|start-end`` items (sidecar files use ``:`` as separator)."""
        return " ".join(f"{a}{sep}{s}-{e}" for a in self.entries for s, e in self.spans(a))

    @classmethod
    def parse(cls, text: str, sep: str = "|") -> "AmrAlignment":
        entries: dict = {}
        for item in text.split():
            addr, s, span = item.rpartition(sep)
            start, dash, end = span.partition("-")
            if not s or not dash or not start.isdigit() or not end.isdigit() or not addr:
                raise ValueError(f"malformed alignment item {item!r}")
            entries.setdefault(addr, set()).update(range(int(start), int(end) + 1))
        return cls(entries)


def _addr_key(addr: str):
    return tuple(int(x) for x in addr.split("."))


def clean_token(tok: str) -> str:
    """Lowercase and strip leading/trailing punctuation."""
    i, j = 0, len(tok)
    while i < j and unicodedata.category(tok[i]).startswith("P"):
        i += 1
    while j > i and unicodedata.category(tok[j - 1]).startswith("P"):
        j -= 1
    return tok[i:j].lower()


def _rule_exact(label, tok, is_const):
    return not is_const and strip_sense(label).lower() == tok


def _rule_prefix(label, tok, is_const):
    if is_const:
        return False
    c = strip_sense(label).lower()
    return len(c) >= 4 and len(tok) >= 4 and c[:4] == tok[:4]


def _rule_constant(label, tok, is_const):
    return is_const and label != "-" and label.lower() == tok


def _rule_negation(label, tok, is_const):
    return is_const and label == "-" and tok in NEGATION_TOKENS


RULES = (_rule_exact, _rule_prefix, _rule_constant, _rule_negation)


def align_concepts(sentence: Sequence[str], g: AmrGraph) -> AmrAlignment:
    """Align nodes to tokens with a four-rule cascade; earlier rules win.

    Rules: exact match after sense stripping, shared 4-character prefix,
    constant value equal to the token, and polarity ``-`` to a negation word.
    A node takes the leftmost matching token not yet used by another node,
    or the leftmost matching token when all are taken.
    """
    toks = [clean_token(t) for t in sentence]
    addresses = g.addresses()
    aligned: dict = {}
    used: set = set()
    for rule in RULES:
        for addr, node in addresses.items():
            if addr in aligned:
                continue
            is_const = isinstance(node, tuple)
            label = node[2].value if is_const else g.concepts[node]
            hits = [i for i, t in enumerate(toks) if t and rule(label, t, is_const)]
            if not hits:
                continue
            free = [i for i in hits if i not in used]
            pick = free[0] if free else hits[0]
            aligned[addr] = {pick}
            used.add(pick)
    _align_templates(g, addresses, aligned)
    return AmrAlignment(aligned)


def _align_templates(g: AmrGraph, addresses: dict, aligned: dict) -> None:
    node_addr = {node: a for a, node in addresses.items()}
    for addr, node in addresses.items():
        if addr in aligned or isinstance(node, tuple) or g.concepts[node] not in ENTITY_TEMPLATES:
            continue
        children = g.child_edges(node)
        if not children:
            continue
        leaves = all(isinstance(t, Constant) or not g.child_edges(t) for _, _, t in children)
        if not leaves:
            continue
        toks = set()
        for edge in children:
            key = edge if isinstance(edge[2], Constant) else edge[2]
            toks.update(aligned.get(node_addr.get(key), ()))
        if toks and max(toks) - min(toks) + 1 == len(toks):
            aligned[addr] = set(toks)


def coverage(alignment: AmrAlignment, g: AmrGraph, n_tokens: int) -> dict:
    """Fractions of nodes (variables and constants) and of tokens that are aligned."""
    n_nodes = len(g.addresses())
    tokens = set()
    for toks in alignment.entries.values():
        tokens.update(toks)
    return {
        "nodes": len(alignment.entries) / n_nodes if n_nodes else 0.0,
        "tokens": len(tokens) / n_tokens if n_tokens else 0.0,
    }


def write_sidecar(alignments: Sequence[AmrAlignment], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for n, a in enumerate(alignments):
            fh.write(f"{n}\t{a.format(':')}\n")


def read_sidecar(path) -> list:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            n, _, body = line.partition("\t")
            if not n.isdigit() or int(n) != len(out):
                raise ValueError(f"{path}:{lineno}: expected record number {len(out)}")
            try:
                out.append(AmrAlignment.parse(body, ":"))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return out
