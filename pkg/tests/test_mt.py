import math

import pytest
from hypothesis import given, settings, strategies as st

from amrx.mt import BACKWARD, FORWARD, DictionaryTranslator, FileTranslator, back_translate, bleu_score, format_bleu

WORDS = st.text(alphabet="abcdefgh", min_size=1, max_size=5)


def bleu_reference(hyp, ref, max_n=4):
    """Single-sentence BLEU written directly from the clipped-precision definition."""
    h, r = hyp.split(), ref.split()
    logs = []
    for n in range(1, max_n + 1):
        hg = [tuple(h[i:i + n]) for i in range(len(h) - n + 1)]
        rg = [tuple(r[i:i + n]) for i in range(len(r) - n + 1)]
        matched = sum(min(hg.count(g), rg.count(g)) for g in set(hg))
        if not hg or matched == 0:
            return 0.0
        logs.append(math.log(matched / len(hg)))
    bp = 1.0 if len(h) > len(r) else math.exp(1 - len(r) / len(h))
    return bp * math.exp(sum(logs) / max_n)


def test_dictionary_round_trip_is_identity_when_bijective():
    t = DictionaryTranslator({"the": "il", "house": "casa", "red": "rossa"})
    sents = ["the red house", "the house"]
    assert t.translate(sents, FORWARD) == ["il rossa casa", "il casa"]
    assert back_translate(t, sents) == sents


def test_dictionary_lossy_round_trip():
    t = DictionaryTranslator({"home": "casa", "house": "casa"}, {"casa": "house"})
    assert back_translate(t, ["home"]) == ["house"]
    # without an explicit backward table the alphabetically first source wins
    assert back_translate(DictionaryTranslator({"house": "casa", "home": "casa"}), ["house"]) == ["home"]


def test_unknown_words_copied():
    t = DictionaryTranslator({"a": "b"})
    assert t.translate(["a xyzzy"], FORWARD) == ["b xyzzy"]
    with pytest.raises(ValueError):
        t.translate(["a"], "sideways")


def test_dictionary_from_file(tmp_path):
    (tmp_path / "lex.tsv").write_text("dog\tkane\ndog\tcane\n\ncat\tgatto\n")
    t = DictionaryTranslator.from_file(tmp_path / "lex.tsv")
    assert t.forward == {"dog": "kane", "cat": "gatto"}
    (tmp_path / "bad.tsv").write_text("dog kane\n")
    with pytest.raises(ValueError, match=":1:"):
        DictionaryTranslator.from_file(tmp_path / "bad.tsv")


def test_file_translator(tmp_path):
    (tmp_path / "en").write_text("a b\nc\n")
    (tmp_path / "fr").write_text("x y\nz\n")
    t = FileTranslator({FORWARD: (tmp_path / "en", tmp_path / "fr"), BACKWARD: (tmp_path / "fr", tmp_path / "en")})
    assert back_translate(t, ["c", "a b"]) == ["c", "a b"]
    with pytest.raises(KeyError):
        t.translate(["missing"], FORWARD)
    (tmp_path / "short").write_text("x\n")
    with pytest.raises(ValueError, match="mismatch"):
        FileTranslator({FORWARD: (tmp_path / "en", tmp_path / "short")})


def test_bleu_identity():
    refs = ["the cat is on the mat", "there is a cat on the mat"]
    r = bleu_score(refs, refs)
    assert r.bleu == pytest.approx(1.0)
    assert format_bleu(r) == "100.00"


def test_bleu_clipped_unigrams():
    r = bleu_score(["the the the the the the the"], ["the cat is on the mat"])
    assert r.precisions[0] == pytest.approx(2 / 7)
    assert r.bleu == 0.0  # no bigram matches, unsmoothed
    assert format_bleu(r) == "0.00"


def test_bleu_smoothing_keeps_positive():
    r = bleu_score(["the cat sat on a mat"], ["the cat is on the mat"], smooth=True)
    assert 0.0 < r.bleu < 1.0
    assert bleu_score(["the cat sat on a mat"], ["the cat is on the mat"]).bleu == 0.0


def test_bleu_brevity_penalty():
    r = bleu_score(["the cat is on"], ["the cat is on the mat"])
    assert r.brevity_penalty == pytest.approx(math.exp(1 - 6 / 4))
    assert r.bleu == pytest.approx(r.brevity_penalty)


def test_bleu_errors():
    with pytest.raises(ValueError):
        bleu_score(["a"], [])
    with pytest.raises(ValueError):
        bleu_score([], [])


def test_bleu_report_format():
    r = bleu_score(["the cat is on the mat"], ["the cat is on the mat"])
    assert r.format() == "BLEU = 100.00, 100.0/100.0/100.0/100.0 (BP=1.000, hyp_len=6, ref_len=6)"


@settings(max_examples=200)
@given(st.lists(WORDS, min_size=1, max_size=10), st.lists(WORDS, min_size=1, max_size=10))
def test_bleu_matches_reference(h, r):
    hyp, ref = " ".join(h), " ".join(r)
    got = bleu_score([hyp], [ref]).bleu
    assert got == pytest.approx(bleu_reference(hyp, ref), abs=1e-12)
    assert 0.0 <= got <= 1.0
