import shutil
import subprocess
import sys

import pytest

from amrx.cli import main
from amrx.graph import read_corpus
from amrx.parser import MODEL_HEADER
from amrx.wordalign import read_pharaoh
from conftest import SOVEREIGNTY, SOVEREIGNTY_EN, SOVEREIGNTY_IT


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def files(tmp_path):
    (tmp_path / "gold.amr").write_text(f"# ::id 1\n# ::snt {' '.join(SOVEREIGNTY_EN)}\n{SOVEREIGNTY}\n\n")
    (tmp_path / "en.txt").write_text(" ".join(SOVEREIGNTY_EN) + "\n")
    (tmp_path / "it.txt").write_text(" ".join(SOVEREIGNTY_IT) + "\n")
    (tmp_path / "links.txt").write_text("0-0 3-3 5-5 6-6\n")
    return tmp_path


def test_smatch_and_details(capsys, files):
    code, out, _ = run(capsys, "smatch", "--pred", files / "gold.amr", "--gold", files / "gold.amr")
    assert code == 0 and out == "P 1.0000 R 1.0000 F1 1.0000\n"
    code, out, _ = run(capsys, "smatch", "--pred", files / "gold.amr", "--gold", files / "gold.amr", "--details")
    assert out.splitlines()[:2] == ["index\tmatched\tpred_triples\tgold_triples\tprecision\trecall\tf1",
                                    "0\t8\t8\t8\t1.0000\t1.0000\t1.0000"]


def test_bad_penman_is_validation_error(capsys, files):
    (files / "bad.amr").write_text("(a / b\n")
    code, _, err = run(capsys, "smatch", "--pred", files / "bad.amr", "--gold", files / "gold.amr")
    assert code == 2 and "error:" in err


def test_project_and_parser(capsys, files):
    assert run(capsys, "align-amr", "--corpus", files / "gold.amr", "--out", files / "gold.align")[0] == 0
    code, out, _ = run(capsys, "project", "--amr", files / "gold.amr", "--amr-align", files / "gold.align",
                       "--source", files / "en.txt", "--target", files / "it.txt", "--word-align",
                       files / "links.txt", "--out", files / "it.amr", "--stats", files / "stats.tsv")
    assert code == 0 and '"dropped": 0' in out
    (entry,) = read_corpus(files / "it.amr")
    assert entry.metadata["alignments"] == "0|3-3 0.0|0-0 0.1|6-6 0.1.0|5-5"

    assert run(capsys, "parser", "train", "--model", files / "it.parser", "--corpus", files / "it.amr")[0] == 0
    assert (files / "it.parser").read_text().startswith(MODEL_HEADER)
    code, out, _ = run(capsys, "parser", "stats", "--model", files / "it.parser")
    assert out.splitlines() == ["word types\t7", "non-content-bearing (type)\t0.4286"]
    assert run(capsys, "parser", "parse", "--model", files / "it.parser", "--input", files / "it.txt",
               "--out", files / "parsed.amr")[0] == 0
    (parsed,) = read_corpus(files / "parsed.amr")
    code, out, _ = run(capsys, "smatch", "--pred", files / "parsed.amr", "--gold", files / "gold.amr")
    assert out.endswith("F1 1.0000\n")

    # gold-sidecar training path and evaluation protocols
    assert run(capsys, "parser", "train", "--model", files / "en.parser", "--corpus", files / "gold.amr",
               "--alignments", files / "gold.align")[0] == 0
    code, out, _ = run(capsys, "eval", "--protocol", "silver", "--model", files / "it.parser", "--english-model",
                       files / "en.parser", "--source", files / "en.txt", "--target", files / "it.txt")
    assert code == 0 and out == "silver\tP=1.0000\tR=1.0000\tF1=1.0000\n"
    code, out, _ = run(capsys, "eval", "--protocol", "files", "--pred", files / "parsed.amr", "--gold",
                       files / "gold.amr")
    assert out.endswith("F1=1.0000\n")
    code, _, err = run(capsys, "eval", "--protocol", "gold", "--model", files / "it.parser")
    assert code == 2 and "--gold" in err


def test_align_words(capsys, files):
    (files / "a.de").write_text("das haus\ndas buch\n")
    (files / "a.en").write_text("the house\nthe book\n")
    code, out, _ = run(capsys, "align-words", "train", "--source", files / "a.de", "--target", files / "a.en",
                       "--model", files / "m", "--mode", "model1", "--iterations", 10)
    assert code == 0 and out.startswith("forward loglik")
    assert (files / "m.fwd").read_text().startswith("AMRX-ALIGNER v1")
    assert run(capsys, "align-words", "apply", "--source", files / "a.de", "--target", files / "a.en",
               "--model", files / "m", "--out", files / "a.align")[0] == 0
    assert read_pharaoh(files / "a.align") == [{(0, 0), (1, 1)}, {(0, 0), (1, 1)}]
    code, out, _ = run(capsys, "align-words", "apply", "--identity", "--source", files / "a.de",
                       "--target", files / "a.en")
    assert out == "0-0 1-1\n0-0 1-1\n"
    code, _, err = run(capsys, "align-words", "train", "--source", files / "a.de", "--target", files / "a.en")
    assert code == 2 and "--model" in err


def test_translate_and_bleu(capsys, files):
    (files / "lex.tsv").write_text("This\tQuesta\nis\tè\n")
    code, out, _ = run(capsys, "translate", "--lexicon", files / "lex.tsv", "--input", files / "en.txt")
    assert out.startswith("Questa è the")
    code, out, _ = run(capsys, "bleu", "--hyp", files / "en.txt", "--ref", files / "en.txt", "--quiet")
    assert out == "100.00\n"
    (files / "h.txt").write_text("the the the the the the the\n")
    (files / "r.txt").write_text("the cat is on the mat\n")
    code, out, _ = run(capsys, "bleu", "--hyp", files / "h.txt", "--ref", files / "r.txt")
    assert out.startswith("BLEU = 0.00, 28.6/")
    code, _, _ = run(capsys, "translate", "--input", files / "en.txt")
    assert code == 2


def test_ingest(capsys, files):
    (files / "s").write_text("".join(f"e{k}\n" for k in range(6)))
    (files / "t").write_text("".join(f"f{k}\n" for k in range(6)))
    code, _, _ = run(capsys, "ingest", "--source", files / "s", "--target", files / "t", "--sizes", "1/1/1",
                     "--out", files / "splits")
    assert code == 0
    assert (files / "splits" / "f2e.test.src").read_text() == "f5\n"
    code, _, err = run(capsys, "ingest", "--source", files / "s", "--target", files / "t", "--sizes", "2/2/2",
                       "--out", files / "splits")
    assert code == 2 and "insufficient" in err
    with pytest.raises(SystemExit) as info:
        main(["ingest", "--source", "s", "--target", "t", "--sizes", "1/x/1", "--out", "o"])
    assert info.value.code == 2


def test_correlate(capsys, tmp_path):
    code, out, _ = run(capsys, "correlate")
    assert code == 0
    assert out.splitlines()[2].startswith("cycle\t16\t0.9495\t0.8155")
    code, out, _ = run(capsys, "correlate", "--exclude-language", "ZH")
    assert out.splitlines()[1].startswith("silver\t12\t0.8663")
    (tmp_path / "r.tsv").write_text("nope\n")
    assert run(capsys, "correlate", "--records", tmp_path / "r.tsv")[0] == 2


def test_synth_run_and_exit_codes(capsys, tmp_path):
    code, out, _ = run(capsys, "synth", "--out", tmp_path / "exp", "--seed", 2)
    cfg = out.strip()
    assert code == 0 and cfg.endswith("experiment.cfg")
    small = ["--set", "train_size=60", "--set", "dev_size=10", "--set", "test_size=20"]
    code, out, err = run(capsys, "run", "--config", cfg, *small)
    assert code == 0
    header, row = out.splitlines()
    assert header == "language\tsystem\tsilver\tgold\tcycle" and row.startswith("SY\tprojection\t")
    assert "stages run: ingest" in err
    code, again, err = run(capsys, "run", "--config", cfg, *small)
    assert again == out and "stages run: none" in err

    assert run(capsys, "run", "--config", cfg, "--set", "system=gt")[0] == 2
    assert run(capsys, "run", "--config", cfg, "--set", "oops")[0] == 2
    assert run(capsys, "run", "--config", tmp_path / "missing.cfg")[0] == 2

    align = tmp_path / "exp" / "run" / "alignments" / "f2e.train.align"
    align.write_text("")
    code, _, err = run(capsys, "run", "--config", cfg, *small)
    assert code == 3 and "f2e.train.align" in err


def test_console_script(tmp_path):
    exe = shutil.which("amrx")
    cmd = [exe] if exe else [sys.executable, "-m", "amrx.cli"]
    proc = subprocess.run(cmd + ["correlate"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("protocol\t")
    proc = subprocess.run(cmd + ["bogus"], capture_output=True, text=True)
    assert proc.returncode == 2
