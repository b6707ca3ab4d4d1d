import math
import random
from collections import defaultdict

import pytest
from hypothesis import given, settings, strategies as st

from amrx import kernels
from amrx.wordalign import (NULL, AlignerModel, AlignmentFormatError, BidirectionalAligner, SentencePair,
                            format_pharaoh, identity_alignment, invert, parse_pharaoh, read_bitext, read_pharaoh,
                            symmetrize, train_aligner, viterbi_align, write_pharaoh)
from conftest import SOVEREIGNTY_EN, SOVEREIGNTY_IT

PIGEONHOLE = [SentencePair.from_text("das haus", "the house"), SentencePair.from_text("das buch", "the book")]


def model1_reference(corpus, iterations):
    """Textbook IBM Model 1 with a null word, written from scratch."""
    src_types = {NULL} | {w.lower() for p in corpus for w in p.source}
    cooc = defaultdict(set)
    for p in corpus:
        for s in (NULL,) + tuple(w.lower() for w in p.source):
            cooc[s].update(w.lower() for w in p.target)
    t = {(s, f): 1.0 / len(cooc[s]) for s in src_types for f in cooc[s]}
    lls = []
    for _ in range(iterations):
        counts = defaultdict(float)
        ll = 0.0
        for p in corpus:
            src = (NULL,) + tuple(w.lower() for w in p.source)
            for f in (w.lower() for w in p.target):
                z = sum(t[(s, f)] for s in src) / len(src)
                ll += math.log(z)
                for s in src:
                    counts[(s, f)] += t[(s, f)] / len(src) / z
        lls.append(ll)
        totals = defaultdict(float)
        for (s, f), c in counts.items():
            totals[s] += c
        t = {(s, f): c / totals[s] for (s, f), c in counts.items()}
    return t, lls


def synthetic_bitext(rng, n, vocab=40):
    words = [f"w{k}" for k in range(vocab)]
    out = []
    for _ in range(n):
        src = [rng.choice(words) for _ in range(rng.randint(2, 9))]
        tgt = [w.upper() + "x" for w in src]
        if rng.random() < 0.3:
            tgt.append("filler")
        if rng.random() < 0.2:
            rng.shuffle(tgt)
        out.append(SentencePair(src, tgt))
    return out


def test_pigeonhole():
    m = train_aligner(PIGEONHOLE, 10, "model1")
    assert m.prob("das", "the") > m.prob("das", "house")
    assert m.prob("das", "the") > 0.9


def test_single_pair_forced_mass():
    m = train_aligner([SentencePair(["a"], ["b"])], 1, "model1")
    assert m.prob("a", "b") == pytest.approx(1.0)


def test_matches_reference_model1():
    corpus = synthetic_bitext(random.Random(1), 60)
    m = train_aligner(corpus, 6, "model1")
    ref, lls = model1_reference(corpus, 6)
    assert m.loglik == pytest.approx(lls, rel=1e-9)
    for key, p in ref.items():
        assert m.lexical_table[key] == pytest.approx(p, abs=1e-9)


@pytest.mark.parametrize("mode", ["model1", "diagonal"])
def test_distributions_normalized(mode):
    corpus = synthetic_bitext(random.Random(2), 80)
    m = train_aligner(corpus, 4, mode)
    for total in m.source_totals().values():
        assert total == pytest.approx(1.0, abs=1e-6)


def test_model1_loglik_monotone():
    corpus = synthetic_bitext(random.Random(3), 200)
    lls = train_aligner(corpus, 10, "model1").loglik
    assert all(b >= a - 1e-9 for a, b in zip(lls, lls[1:]))


def test_diagonal_tension_stays_in_range():
    corpus = synthetic_bitext(random.Random(4), 100)
    m = train_aligner(corpus, 5, "diagonal")
    assert 0.1 <= m.tension <= 14.0


def test_diagonal_prefers_monotone_links():
    # repeated word: position prior decides which "a" generates which "A"
    corpus = [SentencePair("a b a".split(), "A B A".split())] * 3 + PIGEONHOLE
    m = train_aligner(corpus, 5, "diagonal")
    assert viterbi_align(m, corpus[0]) == {(0, 0), (1, 1), (2, 2)}


def test_training_errors():
    with pytest.raises(ValueError):
        train_aligner([], 5)
    with pytest.raises(ValueError):
        train_aligner(PIGEONHOLE, 0)
    with pytest.raises(ValueError):
        train_aligner(PIGEONHOLE, 1, "hmm")
    with pytest.raises(ValueError):
        SentencePair([], ["x"])
    with pytest.raises(ValueError):
        SentencePair(["a b"], ["x"])


def test_viterbi_pigeonhole():
    m = train_aligner(PIGEONHOLE, 10, "model1")
    assert viterbi_align(m, PIGEONHOLE[0]) == {(0, 0), (1, 1)}


def test_viterbi_unseen_words_are_null():
    m = train_aligner(PIGEONHOLE, 5, "model1")
    assert viterbi_align(m, SentencePair.from_text("zip zap", "the house")) == frozenset()


def test_viterbi_ties_go_to_smallest_source():
    m = AlignerModel({("x", "y"): 1.0}, mode="model1", null_prob=0.0)
    assert viterbi_align(m, SentencePair.from_text("x x", "y")) == {(0, 0)}


def test_viterbi_dictionary_model_worked_example():
    lexicon = {("this", "questa"): 1.0, ("sovereignty", "sovranità"): 1.0, ("each", "ogni"): 1.0,
               ("country", "paese"): 1.0}
    m = AlignerModel.from_dictionary(lexicon)
    links = viterbi_align(m, SentencePair(SOVEREIGNTY_EN, SOVEREIGNTY_IT))
    assert links == {(0, 0), (3, 3), (5, 5), (6, 6)}


def test_symmetrize():
    a = frozenset({(0, 0), (1, 1)})
    assert symmetrize(a, a) == a
    assert symmetrize(a, {(0, 0)}) == {(0, 0)}
    assert symmetrize(a, {(2, 2)}, "union") == {(0, 0), (1, 1), (2, 2)}
    with pytest.raises(ValueError):
        symmetrize(a, a, "grow-diag")


@settings(max_examples=100)
@given(st.frozensets(st.tuples(st.integers(0, 9), st.integers(0, 9))),
       st.frozensets(st.tuples(st.integers(0, 9), st.integers(0, 9))))
def test_union_contains_intersection(a, b):
    assert symmetrize(a, b, "intersect") <= symmetrize(a, b, "union")


def test_bidirectional_intersection():
    corpus = synthetic_bitext(random.Random(6), 150)
    al = BidirectionalAligner.train(corpus, 5, "diagonal")
    for pair in corpus[:20]:
        links = al.align(pair)
        fwd = viterbi_align(al.forward, pair)
        bwd = invert(viterbi_align(al.backward, pair.reversed()))
        assert links == fwd & bwd
        assert all(0 <= i < len(pair.source) and 0 <= j < len(pair.target) for i, j in links)


def test_viterbi_deterministic():
    corpus = synthetic_bitext(random.Random(8), 50)
    m = train_aligner(corpus, 3)
    assert [viterbi_align(m, p) for p in corpus] == [viterbi_align(m, p) for p in corpus]


def test_identity_alignment():
    assert identity_alignment(SentencePair.from_text("a b c", "x y")) == {(0, 0), (1, 1)}


# -- files ---------------------------------------------------------------

def test_pharaoh_format():
    assert format_pharaoh({(6, 5), (0, 0), (5, 4), (3, 3)}) == "0-0 3-3 5-4 6-5"
    assert format_pharaoh(set()) == ""
    assert parse_pharaoh("") == frozenset()
    with pytest.raises(AlignmentFormatError):
        parse_pharaoh("0-0 1:2")
    with pytest.raises(AlignmentFormatError):
        parse_pharaoh("a-1")


@settings(max_examples=500)
@given(st.frozensets(st.tuples(st.integers(0, 200), st.integers(0, 200))))
def test_pharaoh_round_trip(a):
    assert parse_pharaoh(format_pharaoh(a)) == a


def test_pharaoh_files(tmp_path):
    data = [frozenset({(0, 1)}), frozenset(), frozenset({(2, 2), (1, 0)})]
    write_pharaoh(data, tmp_path / "a.txt")
    assert read_pharaoh(tmp_path / "a.txt") == data
    (tmp_path / "bad.txt").write_text("0-0\nx\n")
    with pytest.raises(AlignmentFormatError, match=":2:"):
        read_pharaoh(tmp_path / "bad.txt")


def test_model_save_load(tmp_path):
    m = train_aligner(PIGEONHOLE, 4, "diagonal")
    m.save(tmp_path / "m.txt")
    assert (tmp_path / "m.txt").read_text().startswith("AMRX-ALIGNER v1\n")
    back = AlignerModel.load(tmp_path / "m.txt")
    assert back.mode == m.mode and back.tension == m.tension and back.null_prob == m.null_prob
    assert back.lexical_table == m.lexical_table
    (tmp_path / "x.txt").write_text("nope\n")
    with pytest.raises(ValueError):
        AlignerModel.load(tmp_path / "x.txt")


def test_read_bitext_errors(tmp_path):
    (tmp_path / "a").write_text("x y\nz\n")
    (tmp_path / "b").write_text("p\n")
    with pytest.raises(ValueError, match="mismatch"):
        read_bitext(tmp_path / "a", tmp_path / "b")
    (tmp_path / "c").write_bytes(b"ok\n\xff\xfe\n")
    (tmp_path / "d").write_text("p\nq\n")
    with pytest.raises(ValueError, match="c:2: invalid UTF-8"):
        read_bitext(tmp_path / "c", tmp_path / "d")


@pytest.mark.skipif("cython" not in kernels.backends(), reason="extension not built")
@pytest.mark.parametrize("mode", ["model1", "diagonal"])
def test_backends_agree(mode):
    corpus = synthetic_bitext(random.Random(9), 120)
    b = kernels.backends()
    py = train_aligner(corpus, 4, mode, backend=b["python"])
    cy = train_aligner(corpus, 4, mode, backend=b["cython"])
    assert py.loglik == pytest.approx(cy.loglik, rel=1e-12)
    assert py.tension == pytest.approx(cy.tension, rel=1e-12)
    for key, p in py.lexical_table.items():
        assert cy.lexical_table[key] == pytest.approx(p, abs=1e-12)
