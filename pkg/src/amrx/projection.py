"""Transfer of AMR alignments across word-aligned sentence pairs.

The graph is never touched: only the token side of the AMR alignment moves.
A node aligned to source token ``i`` becomes aligned to every target token
``j`` with ``(i, j)`` in the word alignment, and to nothing else.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .amralign import AmrAlignment
from .graph import AmrEntry, AmrGraph, serialize_penman
from .wordalign import SentencePair


class ProjectionError(ValueError):
    pass


@dataclass(frozen=True)
class ProjectedExample:
    target_tokens: tuple
    graph: AmrGraph
    alignment: AmrAlignment
    id: str = ""

    def to_entry(self) -> AmrEntry:
        return AmrEntry(self.id, " ".join(self.target_tokens), self.graph,
                        {"alignments": self.alignment.format("|")})


def project_sentence(source: AmrAlignment, word_alignment, target_len: int,
                     source_len: int | None = None) -> AmrAlignment:
    """Closure of the projection rule over one sentence pair."""
    by_token = source.by_token()
    if source_len is not None:
        for i in by_token:
            if not 0 <= i < source_len:
                raise ProjectionError(f"AMR alignment token {i} outside source sentence of length {source_len}")
    projected: dict = {}
    for i, j in sorted(word_alignment):
        if not 0 <= j < target_len:
            raise ProjectionError(f"word link {i}-{j} outside target sentence of length {target_len}")
        if i < 0 or (source_len is not None and i >= source_len):
            raise ProjectionError(f"word link {i}-{j} outside source sentence of length {source_len}")
        for addr in by_token.get(i, ()):
            projected.setdefault(addr, set()).add(j)
    return AmrAlignment(projected)


@dataclass
class ProjectionStats:
    sentences: int = 0
    nodes: int = 0
    aligned_before: int = 0
    aligned_after: int = 0
    per_sentence: list = field(default_factory=list)

    @property
    def dropped(self) -> int:
        return self.aligned_before - self.aligned_after

    @property
    def coverage_before(self) -> float:
        return self.aligned_before / self.nodes if self.nodes else 0.0

    @property
    def coverage_after(self) -> float:
        return self.aligned_after / self.nodes if self.nodes else 0.0

    def summary(self) -> dict:
        return {
            "sentences": self.sentences,
            "nodes": self.nodes,
            "aligned_before": self.aligned_before,
            "aligned_after": self.aligned_after,
            "dropped": self.dropped,
            "coverage_before": round(self.coverage_before, 6),
            "coverage_after": round(self.coverage_after, 6),
        }

    def format_tsv(self) -> str:
        lines = ["index\tnodes\taligned_before\taligned_after"]
        lines += ["\t".join(map(str, row)) for row in self.per_sentence]
        return "\n".join(lines) + "\n"


def project_corpus(entries: Sequence[AmrEntry], source_alignments: Sequence[AmrAlignment],
                   parallel: Sequence[SentencePair], word_alignments: Sequence) -> tuple:
    """Project a whole corpus; returns (list of ProjectedExample, ProjectionStats)."""
    n = len(entries)
    if not (len(source_alignments) == len(parallel) == len(word_alignments) == n):
        raise ProjectionError(
            f"length mismatch: {n} AMRs, {len(source_alignments)} AMR alignments, "
            f"{len(parallel)} sentence pairs, {len(word_alignments)} word alignments")
    stats = ProjectionStats()
    out = []
    for k, (entry, src_al, pair, wal) in enumerate(zip(entries, source_alignments, parallel, word_alignments)):
        projected = project_sentence(src_al, wal, len(pair.target), len(pair.source))
        nodes = len(entry.graph.addresses())
        stats.sentences += 1
        stats.nodes += nodes
        stats.aligned_before += len(src_al.entries)
        stats.aligned_after += len(projected.entries)
        stats.per_sentence.append((k, nodes, len(src_al.entries), len(projected.entries)))
        out.append(ProjectedExample(pair.target, entry.graph, projected, entry.id))
    return out, stats


def graphs_preserved(entries: Sequence[AmrEntry], projected: Sequence[ProjectedExample]) -> bool:
    return all(serialize_penman(e.graph) == serialize_penman(p.graph) for e, p in zip(entries, projected))
