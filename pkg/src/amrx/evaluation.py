"""Silver, gold and full-cycle evaluation, and the correlation analysis between them.

Which data each protocol may read is fixed by its signature: silver sees only
a parsed parallel test split, gold sees the target-language gold corpus, and
full-cycle sees only English gold data plus the two parallel splits.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .amralign import align_concepts
from .graph import AmrEntry
from .mt import BACKWARD, Translator, back_translate
from .parser import ParserModel, parse_sentence, parse_with_alignment, train_parser
from .projection import ProjectedExample, project_corpus
from .smatch import DEFAULT_RESTARTS, SmatchResult, smatch_corpus
from .wordalign import SentencePair

SYSTEMS = ("projection", "mt-file", "mt-dict")
PROTOCOLS = ("silver", "cycle")

# Published multilingual results: (language, system, silver, gold, cycle), Smatch in percent
REFERENCE_RESULTS = (
    ("IT", "Projection", 45, 43, 45),
    ("IT", "Moses", 51, 52, 51),
    ("IT", "Nematus", 49, 43, 41),
    ("IT", "GT", 52, 58, 59),
    ("ES", "Projection", 44, 42, 44),
    ("ES", "Moses", 53, 53, 51),
    ("ES", "Nematus", 51, 43, 42),
    ("ES", "GT", 56, 60, 60),
    ("DE", "Projection", 45, 39, 43),
    ("DE", "Moses", 50, 49, 49),
    ("DE", "Nematus", 47, 38, 39),
    ("DE", "GT", 54, 57, 59),
    ("ZH", "Projection", 45, 35, 32),
    ("ZH", "Moses", 57, 42, 48),
    ("ZH", "Nematus", 57, 39, 40),
    ("ZH", "GT", 64, 50, 55),
)


class SplitOverlapError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentRecord:
    language: str
    system: str
    silver: float
    gold: float
    cycle: float

    def __post_init__(self):
        for name in ("silver", "gold", "cycle"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} score {v} outside [0, 1]")


def reference_records() -> list:
    return [ExperimentRecord(lang, sys_, s / 100, g / 100, c / 100) for lang, sys_, s, g, c in REFERENCE_RESULTS]


RECORD_COLUMNS = ("language", "system", "silver", "gold", "cycle")


def format_records(records: Sequence[ExperimentRecord]) -> str:
    lines = ["\t".join(RECORD_COLUMNS)]
    for r in records:
        lines.append(f"{r.language}\t{r.system}\t{r.silver:.4f}\t{r.gold:.4f}\t{r.cycle:.4f}")
    return "\n".join(lines) + "\n"


def read_records(path) -> list:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines or tuple(lines[0].split("\t")) != RECORD_COLUMNS:
        raise ValueError(f"{path}: expected header {' '.join(RECORD_COLUMNS)}")
    out = []
    for lineno, line in enumerate(lines[1:], 2):
        parts = line.split("\t")
        if len(parts) != 5:
            raise ValueError(f"{path}:{lineno}: expected 5 columns")
        try:
            out.append(ExperimentRecord(parts[0], parts[1], float(parts[2]), float(parts[3]), float(parts[4])))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    return out


# -- statistics ------------------------------------------------------------

def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    n = len(xs)
    if n != len(ys):
        raise ValueError("length mismatch")
    if n < 2:
        raise ValueError("need at least two points")
    mx = sum(xs) / n
    my = sum(ys) / n
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0 or syy == 0:
        raise ValueError("zero variance: Pearson correlation undefined")
    return max(-1.0, min(1.0, sxy / math.sqrt(sxx * syy)))


def kendall_tau_b(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Tie-corrected Kendall rank correlation, (C - D) / sqrt((n0 - n1)(n0 - n2))."""
    n = len(xs)
    if n != len(ys):
        raise ValueError("length mismatch")
    if n < 2:
        raise ValueError("need at least two points")
    concordant = discordant = ties_x = ties_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = xs[i] - xs[j]
            dy = ys[i] - ys[j]
            if dx == 0:
                ties_x += 1
            if dy == 0:
                ties_y += 1
            if dx == 0 or dy == 0:
                continue
            if (dx > 0) == (dy > 0):
                concordant += 1
            else:
                discordant += 1
    n0 = n * (n - 1) // 2
    denom = (n0 - ties_x) * (n0 - ties_y)
    if denom == 0:
        raise ValueError("all values tied: Kendall tau-b undefined")
    return (concordant - discordant) / math.sqrt(denom)


def linear_regression(xs: Sequence[float], ys: Sequence[float]) -> tuple:
    """Ordinary least squares; returns (slope, intercept)."""
    n = len(xs)
    if n != len(ys):
        raise ValueError("length mismatch")
    if n < 2:
        raise ValueError("need at least two points")
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    if sxx == 0:
        raise ValueError("degenerate x: zero variance")
    slope = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sxx
    return slope, my - slope * mx


@dataclass(frozen=True)
class CorrelationReport:
    pearson: float
    kendall_tau_b: float
    regression: tuple
    n: int


def correlate(records: Sequence[ExperimentRecord], exclude_languages=(), per_language: bool = False) -> dict:
    """Correlation of silver and cycle scores with gold, per protocol.

    Regression lines are in Smatch points (scores x 100). With
    `per_language`, Kendall tau-b is the mean of within-language taus.
    """
    rows = [r for r in records if r.language not in set(exclude_languages)]
    if len(rows) < 2:
        raise ValueError("need at least two records to correlate")
    gold = [100 * r.gold for r in rows]
    out = {}
    for protocol in PROTOCOLS:
        ys = [100 * getattr(r, protocol) for r in rows]
        if per_language:
            taus = []
            for lang in sorted({r.language for r in rows}):
                idx = [k for k, r in enumerate(rows) if r.language == lang]
                taus.append(kendall_tau_b([gold[k] for k in idx], [ys[k] for k in idx]))
            tau = sum(taus) / len(taus)
        else:
            tau = kendall_tau_b(gold, ys)
        out[protocol] = CorrelationReport(pearson(gold, ys), tau, linear_regression(gold, ys), len(rows))
    return out


def format_correlation(reports: dict) -> str:
    lines = ["protocol\tn\tpearson\tkendall_tau_b\tslope\tintercept"]
    for protocol, rep in reports.items():
        slope, intercept = rep.regression
        lines.append(f"{protocol}\t{rep.n}\t{rep.pearson:.4f}\t{rep.kendall_tau_b:.4f}\t{slope:.4f}\t{intercept:.4f}")
    return "\n".join(lines) + "\n"


# -- pipeline pieces -------------------------------------------------------

def pair_hash(pair: SentencePair) -> str:
    text = " ".join(pair.source) + "\n" + " ".join(pair.target)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sentence_hash(tokens: Sequence[str]) -> str:
    return hashlib.sha256(" ".join(tokens).encode("utf-8")).hexdigest()


def check_disjoint(named_splits: dict) -> None:
    """Raise SplitOverlapError when a sentence pair appears in two splits."""
    owner: dict = {}
    for name, pairs in named_splits.items():
        for pair in pairs:
            h = pair_hash(pair)
            prev = owner.setdefault(h, name)
            if prev != name:
                raise SplitOverlapError(f"sentence pair {' '.join(pair.source)!r} appears in both {prev} and {name}")


def train_english_parser(gold_train: Sequence[AmrEntry]) -> ParserModel:
    """English parser from gold AMRs with rule-based token alignments."""
    return train_parser(ProjectedExample(tuple(e.tokens), e.graph, align_concepts(e.tokens, e.graph), e.id)
                        for e in gold_train)


def silver_entries(parser: ParserModel, sentences: Sequence[Sequence[str]], prefix: str = "silver") -> list:
    return [AmrEntry(f"{prefix}.{k}", " ".join(toks), parse_sentence(toks, parser)) for k, toks in enumerate(sentences)]


def project_through(parser: ParserModel, pairs: Sequence[SentencePair], word_alignments: Sequence,
                    source_is_english: bool) -> tuple:
    """Parse the source side, align it, project onto the target side.

    English sources are aligned with the rule cascade; other sources use the
    alignment the parser produces while parsing.
    Returns (source silver entries, projected examples, ProjectionStats).
    """
    entries, alignments = [], []
    for k, pair in enumerate(pairs):
        graph, by_product = parse_with_alignment(pair.source, parser)
        alignments.append(align_concepts(pair.source, graph) if source_is_english else by_product)
        entries.append(AmrEntry(f"silver.{k}", " ".join(pair.source), graph))
    projected, stats = project_corpus(entries, alignments, pairs, word_alignments)
    return entries, projected, stats


def evaluate_gold(target_parser: ParserModel, gold_corpus: Sequence[AmrEntry], restarts: int = DEFAULT_RESTARTS,
                  seed: int = 0) -> SmatchResult:
    """Parse target-language gold sentences and score against their (English) AMRs."""
    if not gold_corpus:
        raise ValueError("empty gold corpus")
    preds = [parse_sentence(e.tokens, target_parser) for e in gold_corpus]
    return smatch_corpus(preds, [e.graph for e in gold_corpus], restarts, seed)


def evaluate_files(pred_corpus: Sequence[AmrEntry], gold_corpus: Sequence[AmrEntry],
                   restarts: int = DEFAULT_RESTARTS, seed: int = 0) -> SmatchResult:
    """Score already-parsed output (e.g. from an external parser)."""
    return smatch_corpus([e.graph for e in pred_corpus], [e.graph for e in gold_corpus], restarts, seed)


def evaluate_silver(english_parser: ParserModel, target_parser: ParserModel, parallel_test: Sequence[SentencePair],
                    training_splits: dict | None = None, restarts: int = DEFAULT_RESTARTS,
                    seed: int = 0) -> SmatchResult:
    """Target parser on the target side vs English parser on the English side."""
    if not parallel_test:
        raise ValueError("empty test split")
    check_disjoint({"test": parallel_test, **(training_splits or {})})
    refs = [parse_sentence(p.source, english_parser) for p in parallel_test]
    preds = [parse_sentence(p.target, target_parser) for p in parallel_test]
    return smatch_corpus(preds, refs, restarts, seed)


@dataclass
class CycleArtifacts:
    target_parser: ParserModel
    cycle_parser: ParserModel
    ef_silver: list
    ef_projected: list
    fe_silver: list
    fe_projected: list
    ef_stats: object
    fe_stats: object


def train_target_parser(english_parser: ParserModel, ef_pairs: Sequence[SentencePair], ef_alignments: Sequence):
    silver, projected, stats = project_through(english_parser, ef_pairs, ef_alignments, source_is_english=True)
    return train_parser(projected), silver, projected, stats


def train_cycle_parser(target_parser: ParserModel, fe_pairs: Sequence[SentencePair], fe_alignments: Sequence):
    """`fe_pairs` have the target language as source and English as target."""
    silver, projected, stats = project_through(target_parser, fe_pairs, fe_alignments, source_is_english=False)
    return train_parser(projected), silver, projected, stats


def evaluate_full_cycle(english_gold_train: Sequence[AmrEntry], english_gold_test: Sequence[AmrEntry],
                        ef_pairs: Sequence[SentencePair], fe_pairs: Sequence[SentencePair],
                        ef_alignments: Sequence = (), fe_alignments: Sequence = (), system: str = "projection",
                        translator: Translator | None = None, restarts: int = DEFAULT_RESTARTS,
                        seed: int = 0) -> tuple:
    """Full-cycle Smatch on English gold test data; returns (SmatchResult, CycleArtifacts or None).

    Projection: English parser -> target parser (via e->f data) -> new English
    parser (via f->e data), scored on the English gold test set.
    MT systems: back-translate the test sentences and parse with the English parser.
    """
    if not english_gold_train or not english_gold_test:
        raise ValueError("missing English gold train/test data")
    english_parser = train_english_parser(english_gold_train)
    if system == "projection":
        if not ef_pairs or not fe_pairs:
            raise ValueError("projection full-cycle needs both e->f and f->e parallel splits")
        # fe_pairs are stored f->e; compare in e->f orientation for overlap
        check_disjoint({"e2f": ef_pairs, "f2e": [p.reversed() for p in fe_pairs]})
        target, ef_silver, ef_proj, ef_stats = train_target_parser(english_parser, ef_pairs, ef_alignments)
        cycle, fe_silver, fe_proj, fe_stats = train_cycle_parser(target, fe_pairs, fe_alignments)
        result = evaluate_gold(cycle, english_gold_test, restarts, seed)
        return result, CycleArtifacts(target, cycle, ef_silver, ef_proj, fe_silver, fe_proj, ef_stats, fe_stats)
    if system in ("mt-file", "mt-dict"):
        if translator is None:
            raise ValueError(f"system {system!r} needs a translator")
        sentences = [e.snt for e in english_gold_test]
        noisy = back_translate(translator, sentences)
        preds = [parse_sentence(s.split(), english_parser) for s in noisy]
        return smatch_corpus(preds, [e.graph for e in english_gold_test], restarts, seed), None
    raise ValueError(f"unknown system {system!r}")


def evaluate_mt_gold(english_parser: ParserModel, translator: Translator, gold_corpus: Sequence[AmrEntry],
                     restarts: int = DEFAULT_RESTARTS, seed: int = 0) -> SmatchResult:
    """MT route on target gold data: translate to English, parse with the English parser."""
    if not gold_corpus:
        raise ValueError("empty gold corpus")
    english = translator.translate([e.snt for e in gold_corpus], BACKWARD)
    preds = [parse_sentence(s.split(), english_parser) for s in english]
    return smatch_corpus(preds, [e.graph for e in gold_corpus], restarts, seed)


def evaluate_mt_silver(english_parser: ParserModel, translator: Translator, parallel_test: Sequence[SentencePair],
                       training_splits: dict | None = None, restarts: int = DEFAULT_RESTARTS,
                       seed: int = 0) -> SmatchResult:
    if not parallel_test:
        raise ValueError("empty test split")
    check_disjoint({"test": parallel_test, **(training_splits or {})})
    refs = [parse_sentence(p.source, english_parser) for p in parallel_test]
    english = translator.translate([" ".join(p.target) for p in parallel_test], BACKWARD)
    preds = [parse_sentence(s.split(), english_parser) for s in english]
    return smatch_corpus(preds, refs, restarts, seed)
