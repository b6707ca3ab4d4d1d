"""EM word alignment (IBM Model 1, or the diagonal-prior reparameterization).

A model conditions target words on source words: ``t(target | source)``.
Alignments are sets of ``(i, j)`` links, ``i`` a 0-based source position and
``j`` a 0-based target position.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import kernels

log = logging.getLogger(__name__)

NULL = "<null>"
MODEL_HEADER = "AMRX-ALIGNER v1"
DEFAULT_P0 = 0.08
DEFAULT_TENSION = 4.0
DEFAULT_ITERATIONS = 5
_TENSION_MIN, _TENSION_MAX = 0.1, 14.0


class AlignmentFormatError(ValueError):
    pass


@dataclass(frozen=True)
class SentencePair:
    source: tuple
    target: tuple

    def __post_init__(self):
        object.__setattr__(self, "source", tuple(self.source))
        object.__setattr__(self, "target", tuple(self.target))
        if not self.source or not self.target:
            raise ValueError("sentence pair sides must be non-empty")
        for tok in self.source + self.target:
            if not tok or any(ch.isspace() for ch in tok):
                raise ValueError(f"invalid token {tok!r}")

    @classmethod
    def from_text(cls, source: str, target: str) -> "SentencePair":
        return cls(source.split(), target.split())

    def reversed(self) -> "SentencePair":
        return SentencePair(self.target, self.source)


@dataclass
class AlignerModel:
    lexical_table: dict  # (source type, target type) -> probability
    tension: float = DEFAULT_TENSION
    null_prob: float = DEFAULT_P0
    mode: str = "diagonal"
    loglik: list = field(default_factory=list)

    def prob(self, source: str, target: str) -> float:
        return self.lexical_table.get((source, target), 0.0)

    @classmethod
    def from_dictionary(cls, pairs: Iterable[tuple]) -> "AlignerModel":
        """Deterministic model from (source, target) word pairs, uniform per source word."""
        by_src: dict = {}
        for s, t in pairs:
            by_src.setdefault(s.lower(), set()).add(t.lower())
        table = {(s, t): 1.0 / len(ts) for s, ts in by_src.items() for t in ts}
        return cls(table, tension=0.0, null_prob=0.0, mode="model1")

    def source_totals(self) -> dict:
        totals: dict = {}
        for (s, _), p in self.lexical_table.items():
            totals[s] = totals.get(s, 0.0) + p
        return totals

    def save(self, path) -> None:
        lines = [
            MODEL_HEADER,
            f"mode\t{self.mode}",
            f"tension\t{self.tension!r}",
            f"null_prob\t{self.null_prob!r}",
            "loglik\t" + " ".join(repr(x) for x in self.loglik),
            "table",
        ]
        for (s, t), p in sorted(self.lexical_table.items()):
            lines.append(f"{s}\t{t}\t{p!r}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "AlignerModel":
        lines = Path(path).read_text(encoding="utf-8").split("\n")
        if not lines or lines[0] != MODEL_HEADER:
            raise AlignmentFormatError(f"{path}: not an aligner model (missing {MODEL_HEADER!r} header)")
        header = {}
        k = 1
        while k < len(lines) and lines[k] != "table":
            key, _, value = lines[k].partition("\t")
            header[key] = value
            k += 1
        table = {}
        for lineno, line in enumerate(lines[k + 1:], k + 2):
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise AlignmentFormatError(f"{path}:{lineno}: expected source<TAB>target<TAB>prob")
            table[(parts[0], parts[1])] = float(parts[2])
        loglik = [float(x) for x in header.get("loglik", "").split()]
        return cls(table, float(header["tension"]), float(header["null_prob"]), header["mode"], loglik)


class _Encoding:
    def __init__(self, corpus: Sequence[SentencePair]):
        self.pair_id: dict = {}
        link_pid, null_pid = [], []
        src_len, tgt_len, link_off, tok_off = [], [], [], []
        for pair in corpus:
            src = [w.lower() for w in pair.source]
            tgt = [w.lower() for w in pair.target]
            link_off.append(len(link_pid))
            tok_off.append(len(null_pid))
            src_len.append(len(src))
            tgt_len.append(len(tgt))
            for t in tgt:
                for s in src:
                    link_pid.append(self._id(s, t))
                null_pid.append(self._id(NULL, t))
        self.link_pid = np.array(link_pid, dtype=np.int64)
        self.null_pid = np.array(null_pid, dtype=np.int64)
        self.src_len = np.array(src_len, dtype=np.int64)
        self.tgt_len = np.array(tgt_len, dtype=np.int64)
        self.link_off = np.array(link_off, dtype=np.int64)
        self.tok_off = np.array(tok_off, dtype=np.int64)
        keys = list(self.pair_id)
        src_types = sorted({s for s, _ in keys})
        sidx = {s: i for i, s in enumerate(src_types)}
        self.keys = keys
        self.pair_src = np.array([sidx[s] for s, _ in keys], dtype=np.int64)
        self.n_src = len(src_types)
        # per-token (n, m, j) for the tension gradient
        self.tok_n = np.repeat(self.src_len, self.tgt_len)
        self.tok_m = np.repeat(self.tgt_len, self.tgt_len)
        self.tok_j = np.concatenate([np.arange(m) for m in tgt_len]) if tgt_len else np.zeros(0, dtype=np.int64)

    def size_groups(self) -> dict:
        if not hasattr(self, "_groups"):
            groups: dict = {}
            for idx, key in enumerate(zip(self.tok_n.tolist(), self.tok_m.tolist())):
                groups.setdefault(key, []).append(idx)
            self._groups = {k: np.array(v) for k, v in groups.items()}
        return self._groups

    def _id(self, s, t):
        key = (s, t)
        pid = self.pair_id.get(key)
        if pid is None:
            pid = self.pair_id[key] = len(self.pair_id)
        return pid

    def normalize(self, counts: np.ndarray) -> np.ndarray:
        totals = np.bincount(self.pair_src, weights=counts, minlength=self.n_src)
        return counts / totals[self.pair_src]


def _expected_feature(n: int, m: int, tension: float) -> np.ndarray:
    """E[-|i/n - j/m|] under the normalized diagonal prior, for every target position."""
    i = np.arange(1, n + 1)[None, :] / n
    j = np.arange(1, m + 1)[:, None] / m
    h = -np.abs(i - j)
    w = np.exp(tension * h)
    return (w * h).sum(axis=1) / w.sum(axis=1)


def _update_tension(enc: _Encoding, nonnull: np.ndarray, emp: float, tension: float, steps: int = 8) -> float:
    toks = len(nonnull)
    if toks == 0:
        return tension
    groups = enc.size_groups()
    emp_avg = emp / toks
    for _ in range(steps):
        mod = 0.0
        for (n, m), idx in groups.items():
            feat = _expected_feature(n, m, tension)
            mod += float(np.dot(nonnull[idx], feat[enc.tok_j[idx]]))
        tension += (emp_avg - mod / toks) * 20.0
        tension = min(max(tension, _TENSION_MIN), _TENSION_MAX)
    return tension


def train_aligner(corpus: Sequence[SentencePair], iterations: int = DEFAULT_ITERATIONS, mode: str = "diagonal",
                  p0: float = DEFAULT_P0, tension: float = DEFAULT_TENSION, backend=None) -> AlignerModel:
    """EM training. `loglik[k]` is the corpus log-likelihood under the model entering iteration k."""
    if not corpus:
        raise ValueError("empty corpus")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if mode not in ("model1", "diagonal"):
        raise ValueError(f"unknown aligner mode {mode!r}")
    for k, pair in enumerate(corpus):
        if not pair.source or not pair.target:
            raise ValueError(f"zero-length sentence in pair {k}")
    impl = backend or kernels
    enc = _Encoding(corpus)
    # uniform over co-occurring target types
    probs = enc.normalize(np.ones(len(enc.keys)))
    diagonal = mode == "diagonal"
    nonnull = np.zeros(len(enc.null_pid))
    history = []
    for it in range(iterations):
        counts = np.zeros(len(enc.keys))
        ll, emp = impl.em_estep(enc.link_pid, enc.null_pid, enc.src_len, enc.tgt_len, enc.link_off, enc.tok_off,
                                probs, counts, nonnull, diagonal, p0, tension)
        history.append(ll)
        probs = enc.normalize(counts)
        if diagonal:
            tension = _update_tension(enc, nonnull, emp, tension)
        log.debug("iteration %d loglik %.6f tension %.4f", it, ll, tension)
    table = {key: float(p) for key, p in zip(enc.keys, probs)}
    return AlignerModel(table, tension, p0, mode, history)


def _position_prior(model: AlignerModel, n: int, m: int, j: int):
    if model.mode == "diagonal":
        weights = [math.exp(-model.tension * abs((i + 1.0) / n - (j + 1.0) / m)) for i in range(n)]
        z = sum(weights)
        return [(1.0 - model.null_prob) * w / z for w in weights], model.null_prob
    u = 1.0 / (n + 1)
    return [u] * n, u


def viterbi_align(model: AlignerModel, pair: SentencePair) -> frozenset:
    """Best source position per target word; null (no link) when nothing scores above zero."""
    src = [w.lower() for w in pair.source]
    tgt = [w.lower() for w in pair.target]
    n, m = len(src), len(tgt)
    links = set()
    for j, t in enumerate(tgt):
        prior, null_prior = _position_prior(model, n, m, j)
        best_i, best = -1, 0.0
        for i, s in enumerate(src):
            score = prior[i] * model.prob(s, t)
            if score > best:
                best_i, best = i, score
        null_score = null_prior * model.prob(NULL, t)
        if best_i >= 0 and best >= null_score:
            links.add((best_i, j))
    return frozenset(links)


def symmetrize(forward, backward, method: str = "intersect") -> frozenset:
    """Combine two alignments; `backward` links must already be (source, target) oriented."""
    if method == "intersect":
        return frozenset(forward) & frozenset(backward)
    if method == "union":
        return frozenset(forward) | frozenset(backward)
    raise ValueError(f"unknown symmetrization {method!r}")


def invert(alignment) -> frozenset:
    return frozenset((j, i) for i, j in alignment)


def identity_alignment(pair: SentencePair) -> frozenset:
    return frozenset((i, i) for i in range(min(len(pair.source), len(pair.target))))


class BidirectionalAligner:
    """Source->target and target->source models combined by symmetrization."""

    def __init__(self, forward: AlignerModel, backward: AlignerModel, method: str = "intersect"):
        self.forward = forward
        self.backward = backward
        self.method = method

    @classmethod
    def train(cls, corpus: Sequence[SentencePair], iterations=DEFAULT_ITERATIONS, mode="diagonal",
              method="intersect", p0=DEFAULT_P0, tension=DEFAULT_TENSION):
        fwd = train_aligner(corpus, iterations, mode, p0, tension)
        bwd = train_aligner([p.reversed() for p in corpus], iterations, mode, p0, tension)
        return cls(fwd, bwd, method)

    def align(self, pair: SentencePair) -> frozenset:
        # the forward model generates target words from source words
        fwd = frozenset(viterbi_align(self.forward, pair))
        bwd = invert(viterbi_align(self.backward, pair.reversed()))
        return symmetrize(fwd, bwd, self.method)


# -- Pharaoh format --------------------------------------------------------

def format_pharaoh(alignment) -> str:
    return " ".join(f"{i}-{j}" for i, j in sorted(alignment))


def parse_pharaoh(line: str) -> frozenset:
    links = set()
    for tok in line.split():
        i, sep, j = tok.partition("-")
        if not sep or not i.isdigit() or not j.isdigit():
            raise AlignmentFormatError(f"malformed alignment token {tok!r}")
        links.add((int(i), int(j)))
    return frozenset(links)


def read_pharaoh(path) -> list:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            try:
                out.append(parse_pharaoh(line))
            except AlignmentFormatError as exc:
                raise AlignmentFormatError(f"{path}:{lineno}: {exc}") from None
    return out


def write_pharaoh(alignments: Iterable, path) -> None:
    Path(path).write_text("".join(format_pharaoh(a) + "\n" for a in alignments), encoding="utf-8")


def read_bitext(source_path, target_path) -> list:
    """Line-aligned tokenized files -> SentencePairs."""
    src = _read_lines(source_path)
    tgt = _read_lines(target_path)
    if len(src) != len(tgt):
        raise ValueError(f"bitext length mismatch: {source_path} has {len(src)} lines, {target_path} has {len(tgt)}")
    pairs = []
    for lineno, (s, t) in enumerate(zip(src, tgt), 1):
        try:
            pairs.append(SentencePair.from_text(s, t))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return pairs


def _read_lines(path) -> list:
    data = Path(path).read_bytes()
    lines = data.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    out = []
    for lineno, raw in enumerate(lines, 1):
        try:
            out.append(raw.decode("utf-8").rstrip("\r"))
        except UnicodeDecodeError as exc:
            raise ValueError(f"{path}:{lineno}: invalid UTF-8 ({exc.reason})") from None
    return out
