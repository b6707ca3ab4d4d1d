"""AMR graph model, PENMAN reading/writing and triple extraction.

Graphs are immutable values. Variable names are kept as parsed but carry no
meaning: two graphs are equal when they are isomorphic (see `isomorphic`).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Union

VARIABLE_RE = re.compile(r"^[a-z]\d*$")
_SENSE_RE = re.compile(r"-\d\d$")
_BARE_UNSAFE = re.compile(r'[\s()"/]')


class PenmanError(ValueError):
    """Malformed PENMAN input. `offset` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.message = message
        self.offset = offset


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Constant:
    """Leaf value: a number, a quoted string or a literal such as ``-``."""

    value: str
    quoted: bool = False

    def __str__(self):
        return self.value


Target = Union[str, Constant]
Edge = tuple  # (source var, relation, target var or Constant)
NodeKey = Union[str, tuple]  # variable name, or the edge tuple holding a constant


def strip_sense(concept: str) -> str:
    """``answer-01`` -> ``answer``."""
    return _SENSE_RE.sub("", concept)


@dataclass(frozen=True, eq=False)
class AmrGraph:
    root: str
    concepts: dict  # var -> concept, in definition order
    edges: tuple = ()
    _children: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "concepts", dict(self.concepts))
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        if self.root not in self.concepts:
            raise GraphError(f"root {self.root!r} is not a variable of the graph")
        for var, concept in self.concepts.items():
            if not concept:
                raise GraphError(f"empty concept for variable {var!r}")
        seen = set()
        children = {v: [] for v in self.concepts}
        for idx, edge in enumerate(self.edges):
            src, rel, tgt = edge
            if src not in self.concepts:
                raise GraphError(f"edge source {src!r} is not a variable")
            if not rel.startswith(":") or len(rel) < 2:
                raise GraphError(f"bad relation label {rel!r}")
            if not isinstance(tgt, Constant) and tgt not in self.concepts:
                raise GraphError(f"edge target {tgt!r} is not a variable")
            if edge in seen:
                raise GraphError(f"duplicate edge {edge!r}")
            seen.add(edge)
            children[src].append(idx)
        # canonical child order: relation label, then original edge order
        for var in children:
            children[var].sort(key=lambda i: (self.edges[i][1], i))
        object.__setattr__(self, "_children", children)
        reached = set(self._dfs_order())
        missing = [v for v in self.concepts if v not in reached]
        if missing:
            raise GraphError(f"variables not reachable from root: {missing}")

    # -- structure -------------------------------------------------------

    @property
    def variables(self) -> list:
        return list(self.concepts)

    def concept(self, var: str) -> str:
        return self.concepts[var]

    def child_edges(self, var: str) -> list:
        """Outgoing edges of `var` in canonical order."""
        return [self.edges[i] for i in self._children[var]]

    def constants(self) -> list:
        return [e for e in self.edges if isinstance(e[2], Constant)]

    def _dfs_order(self) -> Iterator[str]:
        seen = {self.root}
        stack = [self.root]
        while stack:
            var = stack.pop()
            yield var
            for i in reversed(self._children[var]):
                tgt = self.edges[i][2]
                if not isinstance(tgt, Constant) and tgt not in seen:
                    seen.add(tgt)
                    stack.append(tgt)

    def addresses(self) -> dict:
        """Map NodeAddress string -> node key (variable name or constant edge).

        Addresses come from a canonical depth-first walk: the root is "0" and
        the k-th child (canonical order) of the node at A is "A.k". Reentrant
        variables keep the address of their first visit.
        """
        out = {}
        visited = set()

        def walk(var, addr):
            visited.add(var)
            out[addr] = var
            for k, i in enumerate(self._children[var]):
                edge = self.edges[i]
                tgt = edge[2]
                child_addr = f"{addr}.{k}"
                if isinstance(tgt, Constant):
                    out[child_addr] = edge
                elif tgt not in visited:
                    walk(tgt, child_addr)

        walk(self.root, "0")
        return out

    def node_addresses(self) -> dict:
        """Inverse of `addresses`: node key -> address."""
        return {node: addr for addr, node in self.addresses().items()}

    def node_label(self, node: NodeKey) -> str:
        if isinstance(node, tuple):
            return node[2].value
        return self.concepts[node]

    def __repr__(self):
        return f"AmrGraph({serialize_penman(self)!r})"


# -- PENMAN reading --------------------------------------------------------

_TOKEN_RE = re.compile(r'\s+|(?P<lp>\()|(?P<rp>\))|(?P<q>"(?:[^"\\]|\\.)*")|(?P<bare>[^\s()"]+)|(?P<bad>")')


def _tokenize(text: str):
    # offsets are byte offsets into the UTF-8 encoding
    char_to_byte = None
    if not text.isascii():
        char_to_byte = []
        n = 0
        for ch in text:
            char_to_byte.append(n)
            n += len(ch.encode("utf-8"))
        char_to_byte.append(n)
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        if kind is None:
            continue
        pos = m.start() if char_to_byte is None else char_to_byte[m.start()]
        if kind == "bad":
            raise PenmanError("unterminated quoted string", pos)
        yield kind, m.group(kind), pos
    end = len(text) if char_to_byte is None else char_to_byte[-1]
    yield "eof", "", end


def _unquote(tok: str) -> str:
    return re.sub(r"\\(.)", r"\1", tok[1:-1])


def parse_penman(text: str) -> AmrGraph:
    """Parse one PENMAN graph.

    Inverse roles such as ``:ARG0-of`` are kept as written. A bare token that
    names a variable defined anywhere in the graph is a reference; any other
    bare token is a constant, except that single-letter-plus-digits tokens
    (``x``, ``b2``) must be defined.
    """
    tokens = list(_tokenize(text))
    pos = 0
    concepts: dict = {}
    defined_at: dict = {}
    edges: list = []
    pending: list = []  # (edge index, token, offset) for bare tokens

    def peek():
        return tokens[pos]

    def take():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        return tok

    def node() -> str:
        kind, val, off = take()
        if kind != "lp":
            raise PenmanError(f"expected '(' but found {val or 'end of input'!r}", off)
        kind, var, voff = take()
        if kind != "bare" or var == "/":
            raise PenmanError("expected a variable after '('", voff)
        if var in concepts:
            raise PenmanError(f"duplicate variable definition {var!r}", voff)
        kind, val, off = take()
        if kind != "bare" or val != "/":
            raise PenmanError(f"expected '/' after variable {var!r}", off)
        kind, concept, coff = peek()
        if kind == "q":
            take()
            concept = _unquote(concept)
        elif kind == "bare" and not concept.startswith(":"):
            take()
        else:
            raise PenmanError(f"empty concept for variable {var!r}", coff)
        if not concept:
            raise PenmanError(f"empty concept for variable {var!r}", coff)
        concepts[var] = concept
        defined_at[var] = voff
        while True:
            kind, val, off = peek()
            if kind == "rp":
                take()
                return var
            if kind == "eof":
                raise PenmanError("unbalanced parentheses: missing ')'", off)
            if kind != "bare" or not val.startswith(":") or len(val) < 2:
                raise PenmanError(f"expected a relation but found {val!r}", off)
            take()
            rel = val
            kind, val, off = peek()
            if kind == "lp":
                child = node()
                edges.append((var, rel, child))
            elif kind == "q":
                take()
                edges.append((var, rel, Constant(_unquote(val), quoted=True)))
            elif kind == "bare" and not val.startswith(":"):
                take()
                pending.append((len(edges), val, off))
                edges.append((var, rel, None))
            else:
                raise PenmanError(f"missing value for relation {rel!r}", off)

    root = node()
    kind, val, off = peek()
    if kind == "rp":
        raise PenmanError("unbalanced parentheses: unexpected ')'", off)
    if kind != "eof":
        raise PenmanError(f"unexpected trailing content {val!r}", off)
    for idx, tok, off in pending:
        src, rel, _ = edges[idx]
        if tok in concepts:
            edges[idx] = (src, rel, tok)
        elif VARIABLE_RE.match(tok):
            raise PenmanError(f"reference to undefined variable {tok!r}", off)
        else:
            edges[idx] = (src, rel, Constant(tok))
    seen = set()
    for edge in edges:
        if edge in seen:
            raise PenmanError(f"duplicate edge {edge[0]} {edge[1]} {edge[2]}", defined_at[edge[0]])
        seen.add(edge)
    return AmrGraph(root, concepts, edges)


# -- PENMAN writing --------------------------------------------------------

def _format_constant(c: Constant, variables) -> str:
    v = c.value
    if c.quoted or not v or _BARE_UNSAFE.search(v) or v.startswith(":") or v in variables or VARIABLE_RE.match(v):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    return v


def _format_concept(concept: str) -> str:
    if _BARE_UNSAFE.search(concept) or concept.startswith(":"):
        return '"' + concept.replace("\\", "\\\\").replace('"', '\\"') + '"'
    return concept


def serialize_penman(g: AmrGraph) -> str:
    """Single-line canonical PENMAN; children sorted by relation label, ties in parse order."""
    parts = []
    visited = set()

    def walk(var):
        visited.add(var)
        parts.append(f"({var} / {_format_concept(g.concepts[var])}")
        for src, rel, tgt in g.child_edges(var):
            parts.append(f" {rel} ")
            if isinstance(tgt, Constant):
                parts.append(_format_constant(tgt, g.concepts))
            elif tgt in visited:
                parts.append(tgt)
            else:
                walk(tgt)
        parts.append(")")

    walk(g.root)
    return "".join(parts)


def rename_variables(g: AmrGraph, mapping: dict) -> AmrGraph:
    def r(x):
        return x if isinstance(x, Constant) else mapping[x]

    return AmrGraph(
        mapping[g.root],
        {mapping[v]: c for v, c in g.concepts.items()},
        [(mapping[s], rel, r(t)) for s, rel, t in g.edges],
    )


def canonical_penman(g: AmrGraph, prefix: str = "x") -> str:
    """PENMAN with variables renamed by canonical visit order (``x0``, ``x1``...)."""
    order = {}
    for addr, node in g.addresses().items():
        if isinstance(node, str) and node not in order:
            order[node] = f"{prefix}{len(order)}"
    return serialize_penman(rename_variables(g, order))


# -- triples ---------------------------------------------------------------

def extract_triples(g: AmrGraph) -> set:
    """Instance, TOP, relation and attribute triples.

    Attribute triples carry the Constant itself as their third element, so
    a constant never collides with a variable of the same spelling.
    """
    triples = {(v, "instance", c) for v, c in g.concepts.items()}
    triples.add((g.root, "TOP", g.concepts[g.root]))
    triples.update(g.edges)
    return triples


# -- isomorphism -----------------------------------------------------------

def _to_networkx(g: AmrGraph):
    import networkx as nx

    nxg = nx.MultiDiGraph()
    for v, c in g.concepts.items():
        nxg.add_node(v, label=("var", c, v == g.root))
    for i, (src, rel, tgt) in enumerate(g.edges):
        if isinstance(tgt, Constant):
            key = ("const", i)
            nxg.add_node(key, label=("const", tgt.value, False))
            nxg.add_edge(src, key, label=rel)
        else:
            nxg.add_edge(src, tgt, label=rel)
    return nxg


def isomorphic(a: AmrGraph, b: AmrGraph) -> bool:
    """True when a variable bijection preserves concepts, edges and root."""
    import networkx as nx
    from networkx.algorithms.isomorphism import categorical_multiedge_match, categorical_node_match

    if len(a.concepts) != len(b.concepts) or len(a.edges) != len(b.edges):
        return False
    return nx.is_isomorphic(
        _to_networkx(a),
        _to_networkx(b),
        node_match=categorical_node_match("label", None),
        edge_match=categorical_multiedge_match("label", None),
    )


# -- corpus files ----------------------------------------------------------

@dataclass
class AmrEntry:
    """One corpus block: metadata comments followed by a PENMAN graph."""

    id: str
    snt: str
    graph: AmrGraph
    metadata: dict = field(default_factory=dict)

    @property
    def tokens(self) -> list:
        return self.snt.split()


_META_RE = re.compile(r"::(\S+)")


def _parse_meta(line: str, meta: dict):
    body = line.lstrip("#").strip()
    pieces = _META_RE.split(body)
    # pieces: [prefix, key1, value1, key2, value2, ...]
    for k in range(1, len(pieces) - 1, 2):
        meta[pieces[k]] = pieces[k + 1].strip()


def iter_blocks(text: str) -> Iterator[tuple]:
    """Yield (metadata dict, penman text, first line number) per blank-line block."""
    meta: dict = {}
    graph_lines: list = []
    start = None
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped:
            if graph_lines:
                yield meta, " ".join(graph_lines), start
            meta, graph_lines, start = {}, [], None
            continue
        if start is None:
            start = lineno
        if stripped.startswith("#") and not graph_lines:
            _parse_meta(stripped, meta)
        else:
            graph_lines.append(stripped)
    if graph_lines:
        yield meta, " ".join(graph_lines), start


def parse_corpus(text: str) -> list:
    """Parse AMR corpus blocks from text."""
    entries = []
    for n, (meta, penman, line) in enumerate(iter_blocks(text)):
        try:
            graph = parse_penman(penman)
        except PenmanError as exc:
            raise PenmanError(f"block at line {line}: {exc.message}", exc.offset) from None
        meta = dict(meta)
        ident = meta.pop("id", str(n))
        snt = meta.pop("snt", "")
        entries.append(AmrEntry(ident, snt, graph, meta))
    return entries


def read_corpus(path: Union[str, Path]) -> list:
    return parse_corpus(Path(path).read_text(encoding="utf-8"))


def format_entry(entry: AmrEntry) -> str:
    lines = [f"# ::id {entry.id}", f"# ::snt {entry.snt}"]
    for key, value in entry.metadata.items():
        lines.append(f"# ::{key} {value}")
    lines.append(serialize_penman(entry.graph))
    return "\n".join(lines) + "\n"


def write_corpus(entries: Iterable[AmrEntry], path: Union[str, Path]) -> None:
    Path(path).write_text("\n".join(format_entry(e) for e in entries), encoding="utf-8")
