"""Translation plumbing for the MT route: translators, back-translation and BLEU."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

FORWARD = "e2f"
BACKWARD = "f2e"


class Translator(Protocol):
    def translate(self, sentences: Sequence[str], direction: str) -> list: ...


class DictionaryTranslator:
    """Word-for-word translation through a lexicon; unknown words are copied."""

    def __init__(self, forward: dict, backward: dict | None = None):
        self.forward = dict(forward)
        if backward is None:
            backward = {}
            for src, tgt in sorted(self.forward.items()):
                backward.setdefault(tgt, src)
        self.backward = dict(backward)

    @classmethod
    def from_file(cls, path) -> "DictionaryTranslator":
        """Lexicon lines ``source<TAB>target``; first entry wins on duplicates."""
        forward: dict = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise ValueError(f"{path}:{lineno}: expected source<TAB>target")
                forward.setdefault(parts[0], parts[1])
        return cls(forward)

    def translate(self, sentences: Sequence[str], direction: str) -> list:
        table = _table(self, direction)
        return [" ".join(table.get(w, w) for w in s.split()) for s in sentences]


def _table(t: DictionaryTranslator, direction: str) -> dict:
    if direction == FORWARD:
        return t.forward
    if direction == BACKWARD:
        return t.backward
    raise ValueError(f"unknown direction {direction!r}")


class FileTranslator:
    """Serves pre-computed translations read from line-aligned files.

    Each direction has a (source file, output file) pair; a sentence is
    translated by looking up its line in the source file.
    """

    def __init__(self, files: dict):
        self.tables = {}
        for direction, (src_path, out_path) in files.items():
            src = Path(src_path).read_text(encoding="utf-8").splitlines()
            out = Path(out_path).read_text(encoding="utf-8").splitlines()
            if len(src) != len(out):
                raise ValueError(f"translation file length mismatch: {src_path} has {len(src)} lines, "
                                 f"{out_path} has {len(out)}")
            table = {}
            for s, o in zip(src, out):
                table.setdefault(s.strip(), o.strip())
            self.tables[direction] = table

    def translate(self, sentences: Sequence[str], direction: str) -> list:
        if direction not in self.tables:
            raise ValueError(f"no translations available for direction {direction!r}")
        table = self.tables[direction]
        out = []
        for s in sentences:
            key = s.strip()
            if key not in table:
                raise KeyError(f"no precomputed translation for {key!r}")
            out.append(table[key])
        return out


def back_translate(translator: Translator, sentences: Sequence[str]) -> list:
    there = translator.translate(list(sentences), FORWARD)
    back = translator.translate(there, BACKWARD)
    if len(back) != len(sentences):
        raise ValueError("translator changed the number of sentences")
    return back


@dataclass(frozen=True)
class BleuReport:
    bleu: float
    precisions: tuple
    brevity_penalty: float
    hyp_length: int
    ref_length: int

    def format(self) -> str:
        ps = "/".join(f"{100 * p:.1f}" for p in self.precisions)
        return (f"BLEU = {100 * self.bleu:.2f}, {ps} (BP={self.brevity_penalty:.3f}, "
                f"hyp_len={self.hyp_length}, ref_len={self.ref_length})")


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu_score(hyps: Sequence[str], refs: Sequence[str], max_n: int = 4, smooth: bool = False) -> BleuReport:
    """Corpus BLEU with clipped n-gram counts and uniform weights; unsmoothed by default.

    With ``smooth=True`` zero-match orders get add-one counts (orders above 1).
    """
    if len(hyps) != len(refs):
        raise ValueError(f"hypothesis/reference count mismatch: {len(hyps)} vs {len(refs)}")
    if not hyps:
        raise ValueError("empty corpus")
    matches = [0] * max_n
    totals = [0] * max_n
    hyp_len = ref_len = 0
    for h, r in zip(hyps, refs):
        ht, rt = h.split(), r.split()
        hyp_len += len(ht)
        ref_len += len(rt)
        for n in range(1, max_n + 1):
            hc, rc = _ngrams(ht, n), _ngrams(rt, n)
            matches[n - 1] += sum(min(c, rc[g]) for g, c in hc.items())
            totals[n - 1] += max(len(ht) - n + 1, 0)
    precisions = []
    for n in range(max_n):
        m, t = matches[n], totals[n]
        if smooth and n > 0:
            m, t = m + 1, t + 1
        precisions.append(m / t if t else 0.0)
    bp = 1.0 if hyp_len > ref_len else (math.exp(1 - ref_len / hyp_len) if hyp_len else 0.0)
    if min(precisions) == 0.0:
        bleu = 0.0
    else:
        bleu = bp * math.exp(sum(math.log(p) for p in precisions) / max_n)
    return BleuReport(bleu, tuple(precisions), bp, hyp_len, ref_len)


def format_bleu(report: BleuReport) -> str:
    """Percentage with two decimals, e.g. ``23.83``."""
    return f"{100 * report.bleu:.2f}"
