"""A small generated language pair for exercising the whole pipeline offline.

English sentences follow ``the [adj] noun [not] verb the [adj] noun`` and come
with tree-shaped AMRs. The target language uses a bijective word lexicon and
local reordering: adjectives follow their noun, and (seeded, per sentence)
the negator may follow the verb.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

from .graph import AmrEntry, AmrGraph, Constant, write_corpus

NOUNS = ("boy", "girl", "dog", "cat", "teacher", "doctor", "city", "river", "book", "car",
         "bird", "farmer", "child", "king", "queen", "horse", "tree", "house", "student", "soldier")
VERBS = ("see", "want", "like", "find", "help", "follow", "visit", "love", "fear", "carry")
ADJECTIVES = ("big", "small", "old", "young", "red", "happy", "tall", "quiet")
FUNCTION_WORDS = ("the", "not")
VOCABULARY = NOUNS + VERBS + ADJECTIVES + FUNCTION_WORDS

_ONSETS = "bdfgklmnprstvz"
_VOWELS = "aeiou"


def make_lexicon(seed: int = 0) -> dict:
    """Bijective English -> pseudo-word lexicon."""
    rng = random.Random(seed)
    used = set(VOCABULARY)
    lexicon = {}
    for word in VOCABULARY:
        while True:
            syllables = rng.randint(1, 3) if word not in FUNCTION_WORDS else 1
            cand = "".join(rng.choice(_ONSETS) + rng.choice(_VOWELS) for _ in range(syllables))
            if cand not in used:
                break
        used.add(cand)
        lexicon[word] = cand
    return lexicon


@dataclass
class Sentence:
    tokens: list
    graph: AmrGraph
    adj_positions: tuple  # (noun index, adjective index) pairs in `tokens`


class _Vars:
    def __init__(self):
        self.used = set()

    def __call__(self, concept):
        base = concept[0]
        name, k = base, 2
        while name in self.used:
            name, k = f"{base}{k}", k + 1
        self.used.add(name)
        return name


def random_sentence(rng: random.Random, adj_rate: float = 0.4, neg_rate: float = 0.2) -> Sentence:
    subj, obj = rng.sample(NOUNS, 2)
    verb = rng.choice(VERBS)
    names = _Vars()
    concepts = {}
    edges = []
    v = names(verb)
    concepts[v] = f"{verb}-01"
    tokens = []
    adj_positions = []

    def noun_phrase(noun, rel):
        var = names(noun)
        concepts[var] = noun
        edges.append((v, rel, var))
        tokens.append("the")
        if rng.random() < adj_rate:
            adj = rng.choice(ADJECTIVES)
            a = names(adj)
            concepts[a] = adj
            edges.append((var, ":mod", a))
            adj_positions.append((len(tokens) + 1, len(tokens)))
            tokens.append(adj)
        tokens.append(noun)

    noun_phrase(subj, ":ARG0")
    if rng.random() < neg_rate:
        edges.append((v, ":polarity", Constant("-")))
        tokens.append("not")
    tokens.append(verb)
    noun_phrase(obj, ":ARG1")
    return Sentence(tokens, AmrGraph(v, concepts, edges), tuple(adj_positions))


class SyntheticLanguage:
    def __init__(self, seed: int = 0, neg_swap_rate: float = 0.5):
        self.seed = seed
        self.lexicon = make_lexicon(seed)
        self.inverse = {t: s for s, t in self.lexicon.items()}
        self.neg_swap_rate = neg_swap_rate

    def translate(self, sentence: Sentence, rng: random.Random) -> list:
        order = list(range(len(sentence.tokens)))
        for noun_i, adj_i in sentence.adj_positions:
            order[adj_i], order[noun_i] = order[noun_i], order[adj_i]
        if "not" in sentence.tokens and rng.random() < self.neg_swap_rate:
            k = sentence.tokens.index("not")
            order[k], order[k + 1] = order[k + 1], order[k]
        return [self.lexicon[sentence.tokens[i]] for i in order]


@dataclass
class SyntheticBundle:
    english_train: list
    english_test: list
    target_gold: list
    bitext: list  # (english tokens, target tokens)
    lexicon: dict


def generate(seed: int = 0, train: int = 200, test: int = 50, bitext_lines: int = 550,
             identity: bool = False) -> SyntheticBundle:
    """All corpora for one experiment; `identity` makes the target language English itself."""
    lang = SyntheticLanguage(seed)
    rng = random.Random(seed)
    seen = set()

    def fresh():
        while True:
            s = random_sentence(rng)
            key = " ".join(s.tokens)
            if key not in seen:
                seen.add(key)
                return s

    def tr(s):
        return list(s.tokens) if identity else lang.translate(s, rng)

    english_train = [fresh() for _ in range(train)]
    english_test = [fresh() for _ in range(test)]
    bitext_src = [fresh() for _ in range(bitext_lines)]
    bitext = [(" ".join(s.tokens), " ".join(tr(s))) for s in bitext_src]
    target_gold = [AmrEntry(f"tgt.{k}", " ".join(tr(s)), s.graph) for k, s in enumerate(english_test)]
    lexicon = {w: w for w in VOCABULARY} if identity else dict(lang.lexicon)
    return SyntheticBundle(
        [AmrEntry(f"train.{k}", " ".join(s.tokens), s.graph) for k, s in enumerate(english_train)],
        [AmrEntry(f"test.{k}", " ".join(s.tokens), s.graph) for k, s in enumerate(english_test)],
        target_gold, bitext, lexicon)


def write_bundle(bundle: SyntheticBundle, directory, language: str = "SY", seed: int = 0,
                 split_sizes=(200, 25, 50), aligner: str = "diagonal") -> Path:
    """Write corpora plus an experiment config; returns the config path."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_corpus(bundle.english_train, d / "english_train.amr")
    write_corpus(bundle.english_test, d / "english_test.amr")
    write_corpus(bundle.target_gold, d / "target_gold.amr")
    (d / "bitext.en").write_text("".join(e + "\n" for e, _ in bundle.bitext), encoding="utf-8")
    (d / "bitext.tgt").write_text("".join(t + "\n" for _, t in bundle.bitext), encoding="utf-8")
    (d / "lexicon.tsv").write_text("".join(f"{s}\t{t}\n" for s, t in sorted(bundle.lexicon.items())),
                                   encoding="utf-8")
    train, dev, test = split_sizes
    config = [
        f"language = {language}",
        "system = projection",
        "english_train = english_train.amr",
        "english_test = english_test.amr",
        "target_gold = target_gold.amr",
        "bitext_source = bitext.en",
        "bitext_target = bitext.tgt",
        "lexicon = lexicon.tsv",
        f"train_size = {train}",
        f"dev_size = {dev}",
        f"test_size = {test}",
        "split_strategy = head",
        f"seed = {seed}",
        f"aligner = {aligner}",
        "output_dir = run",
    ]
    path = d / "experiment.cfg"
    path.write_text("\n".join(config) + "\n", encoding="utf-8")
    return path
