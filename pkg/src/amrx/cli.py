"""Command-line front end (`amrx <subcommand>`).

Exit codes: 0 success, 2 invalid input or configuration, 3 a pipeline stage failed.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .amralign import align_concepts, coverage, read_sidecar, write_sidecar
from .evaluation import (correlate, evaluate_files, evaluate_gold, evaluate_silver, format_correlation,
                         read_records, reference_records)
from .graph import AmrEntry, PenmanError, read_corpus, write_corpus
from .mt import BACKWARD, FORWARD, DictionaryTranslator, FileTranslator, bleu_score, format_bleu
from .parser import ParserModel, non_content_bearing_ratio, parse_sentence, train_parser
from .pipeline import (ConfigError, IntegrityError, PipelineConfig, StageError, ingest_and_split, read_projected,
                       run_experiment, save_aligner, load_aligner, write_projected, write_split, SPLITS)
from .projection import ProjectedExample, project_corpus
from .smatch import smatch_corpus
from .wordalign import (AlignmentFormatError, BidirectionalAligner, format_pharaoh, identity_alignment, read_bitext,
                        read_pharaoh, write_pharaoh)

EXIT_OK, EXIT_INVALID, EXIT_STAGE = 0, 2, 3


def _read_lines(path):
    return Path(path).read_text(encoding="utf-8").splitlines()


def _write_lines(lines, path):
    text = "".join(line + "\n" for line in lines)
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _sizes(text):
    try:
        sizes = tuple(int(x) for x in text.split("/"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected TRAIN/DEV/TEST, got {text!r}") from None
    if len(sizes) != 3 or min(sizes) <= 0:
        raise argparse.ArgumentTypeError("need three positive sizes TRAIN/DEV/TEST")
    return sizes


def _need(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) in (None, "")]
    if missing:
        raise ValueError(f"{args.command}: missing {', '.join(missing)}")


# -- subcommands -----------------------------------------------------------

def cmd_ingest(args):
    pairs = read_bitext(args.source, args.target)
    result = ingest_and_split(pairs, args.sizes, args.seed, args.strategy)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for direction, triple in result.items():
        for name, chunk in zip(SPLITS, triple):
            write_split(chunk, out / f"{direction}.{name}")
    print(f"wrote {len(result) * 3} splits to {out}")


def cmd_align_words(args):
    pairs = read_bitext(args.source, args.target)
    if args.action == "train":
        _need(args, "model")
        aligner = BidirectionalAligner.train(pairs, args.iterations, args.mode, args.symmetrize)
        save_aligner(aligner, args.model)
        print(f"forward loglik {aligner.forward.loglik[-1]:.4f}, tension {aligner.forward.tension:.4f}")
        return
    if args.identity:
        alignments = [identity_alignment(p) for p in pairs]
    else:
        _need(args, "model")
        aligner = load_aligner(args.model, args.symmetrize)
        alignments = [aligner.align(p) for p in pairs]
    if args.out == "-":
        _write_lines((format_pharaoh(a) for a in alignments), None)
    else:
        write_pharaoh(alignments, args.out)


def cmd_align_amr(args):
    corpus = read_corpus(args.corpus)
    alignments = [align_concepts(e.tokens, e.graph) for e in corpus]
    write_sidecar(alignments, args.out)
    nodes = sum(coverage(a, e.graph, len(e.tokens))["nodes"] for a, e in zip(alignments, corpus))
    print(f"aligned {len(corpus)} graphs, mean node coverage {nodes / max(len(corpus), 1):.4f}")


def cmd_project(args):
    corpus = read_corpus(args.amr)
    alignments = read_sidecar(args.amr_align)
    pairs = read_bitext(args.source, args.target)
    links = read_pharaoh(args.word_align)
    examples, stats = project_corpus(corpus, alignments, pairs, links)
    write_projected(examples, args.out)
    if args.stats:
        Path(args.stats).write_text(stats.format_tsv(), encoding="utf-8")
    print(json.dumps(stats.summary(), sort_keys=True))


def cmd_parser(args):
    if args.action == "train":
        _need(args, "corpus")
        if args.alignments:
            corpus = read_corpus(args.corpus)
            sidecar = read_sidecar(args.alignments)
            if len(sidecar) != len(corpus):
                raise ValueError(f"{len(corpus)} graphs but {len(sidecar)} alignment records")
            examples = [ProjectedExample(tuple(e.tokens), e.graph, a, e.id) for e, a in zip(corpus, sidecar)]
        else:
            examples = read_projected(args.corpus)
        train_parser(examples).save(args.model)
        return
    model = ParserModel.load(args.model)
    if args.action == "parse":
        _need(args, "input", "out")
        entries = [AmrEntry(str(k), line.strip(), parse_sentence(line.split(), model))
                   for k, line in enumerate(_read_lines(args.input)) if line.strip()]
        write_corpus(entries, args.out)
        return
    ratio = non_content_bearing_ratio(model, args.level)
    print(f"word types\t{len(model.concept_lexicon)}")
    print(f"non-content-bearing ({args.level})\t{ratio:.4f}")


def _translator(args):
    if args.lexicon:
        return DictionaryTranslator.from_file(args.lexicon)
    if args.files:
        src, out = args.files
        return FileTranslator({args.direction: (src, out)})
    raise ValueError("give --lexicon or --files")


def cmd_translate(args):
    translator = _translator(args)
    _write_lines(translator.translate(_read_lines(args.input), args.direction), args.out)


def cmd_bleu(args):
    report = bleu_score(_read_lines(args.hyp), _read_lines(args.ref), smooth=args.smooth)
    print(format_bleu(report) if args.quiet else report.format())


def cmd_smatch(args):
    pred = read_corpus(args.pred)
    gold = read_corpus(args.gold)
    result = smatch_corpus([e.graph for e in pred], [e.graph for e in gold], args.restarts, args.seed)
    if args.details:
        print("index\tmatched\tpred_triples\tgold_triples\tprecision\trecall\tf1")
        for k, r in enumerate(result.pairs):
            print(f"{k}\t{r.matched}\t{r.pred_total}\t{r.gold_total}\t{r.precision:.4f}\t{r.recall:.4f}\t{r.f1:.4f}")
    print(f"P {result.precision:.4f} R {result.recall:.4f} F1 {result.f1:.4f}")


def cmd_eval(args):
    if args.protocol == "files":
        _need(args, "pred", "gold")
        result = evaluate_files(read_corpus(args.pred), read_corpus(args.gold), args.restarts, args.seed)
    elif args.protocol == "gold":
        _need(args, "model", "gold")
        result = evaluate_gold(ParserModel.load(args.model), read_corpus(args.gold), args.restarts, args.seed)
    else:
        _need(args, "model", "english_model", "source", "target")
        pairs = read_bitext(args.source, args.target)
        result = evaluate_silver(ParserModel.load(args.english_model), ParserModel.load(args.model), pairs,
                                 restarts=args.restarts, seed=args.seed)
    print(f"{args.protocol}\tP={result.precision:.4f}\tR={result.recall:.4f}\tF1={result.f1:.4f}")


def cmd_correlate(args):
    records = read_records(args.records) if args.records else reference_records()
    reports = correlate(records, args.exclude_language or (), args.per_language)
    sys.stdout.write(format_correlation(reports))


def _overrides(pairs):
    out = {}
    for item in pairs or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def cmd_run(args):
    cfg = PipelineConfig.from_file(args.config, _overrides(args.set))
    result = run_experiment(cfg, force=args.force)
    sys.stdout.write(result.report_path.read_text(encoding="utf-8"))
    print(f"# stages run: {', '.join(result.executed) or 'none'}", file=sys.stderr)


def cmd_synth(args):
    from .synthetic import generate, write_bundle
    bundle = generate(args.seed, identity=args.identity)
    path = write_bundle(bundle, args.out, language=args.language, seed=args.seed,
                        aligner="identity" if args.identity else "diagonal")
    print(path)


# -- argument parsing ------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="amrx", description="Cross-lingual AMR parsing and evaluation toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", help="split a bitext into two train/dev/test triples")
    s.add_argument("--source", required=True)
    s.add_argument("--target", required=True)
    s.add_argument("--sizes", type=_sizes, default=(20000, 2000, 2000), help="TRAIN/DEV/TEST")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--strategy", choices=("head", "random"), default="head")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("align-words", help="train or apply the EM word aligner")
    s.add_argument("action", choices=("train", "apply"))
    s.add_argument("--source", required=True)
    s.add_argument("--target", required=True)
    s.add_argument("--model", help="model path prefix (.fwd/.bwd files)")
    s.add_argument("--mode", choices=("diagonal", "model1"), default="diagonal")
    s.add_argument("--iterations", type=int, default=5)
    s.add_argument("--symmetrize", choices=("intersect", "union"), default="intersect")
    s.add_argument("--identity", action="store_true", help="link position i to i instead of using a model")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_align_words)

    s = sub.add_parser("align-amr", help="rule-based concept-to-token alignment")
    s.add_argument("--corpus", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_align_amr)

    s = sub.add_parser("project", help="project AMR alignments through word alignments")
    s.add_argument("--amr", required=True)
    s.add_argument("--amr-align", required=True)
    s.add_argument("--source", required=True)
    s.add_argument("--target", required=True)
    s.add_argument("--word-align", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--stats")
    s.set_defaults(func=cmd_project)

    s = sub.add_parser("parser", help="train, run or inspect the baseline parser")
    s.add_argument("action", choices=("train", "parse", "stats"))
    s.add_argument("--model", required=True)
    s.add_argument("--corpus", help="training corpus (projected, or gold with --alignments)")
    s.add_argument("--alignments", help="alignment sidecar for a plain corpus")
    s.add_argument("--input", help="tokenized sentences, one per line")
    s.add_argument("--out", help="output AMR corpus")
    s.add_argument("--level", choices=("type", "token"), default="type")
    s.set_defaults(func=cmd_parser)

    s = sub.add_parser("translate", help="translate with a lexicon or precomputed files")
    s.add_argument("--direction", choices=(FORWARD, BACKWARD), default=FORWARD)
    s.add_argument("--lexicon")
    s.add_argument("--files", nargs=2, metavar=("SOURCE", "OUTPUT"))
    s.add_argument("--input", required=True)
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_translate)

    s = sub.add_parser("bleu", help="corpus BLEU-4")
    s.add_argument("--hyp", required=True)
    s.add_argument("--ref", required=True)
    s.add_argument("--smooth", action="store_true")
    s.add_argument("--quiet", action="store_true", help="print only the score")
    s.set_defaults(func=cmd_bleu)

    s = sub.add_parser("smatch", help="Smatch between two AMR corpora")
    s.add_argument("--pred", required=True)
    s.add_argument("--gold", required=True)
    s.add_argument("--restarts", type=int, default=4)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--details", action="store_true")
    s.set_defaults(func=cmd_smatch)

    s = sub.add_parser("eval", help="gold, silver or file-based evaluation")
    s.add_argument("--protocol", choices=("gold", "silver", "files"), required=True)
    s.add_argument("--model", help="target parser")
    s.add_argument("--english-model")
    s.add_argument("--gold")
    s.add_argument("--pred")
    s.add_argument("--source")
    s.add_argument("--target")
    s.add_argument("--restarts", type=int, default=4)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("correlate", help="correlation of silver/cycle with gold scores")
    s.add_argument("--records", help="results TSV (default: bundled reference results)")
    s.add_argument("--exclude-language", action="append")
    s.add_argument("--per-language", action="store_true")
    s.set_defaults(func=cmd_correlate)

    s = sub.add_parser("run", help="run a configured experiment")
    s.add_argument("--config", required=True)
    s.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config entry")
    s.add_argument("--force", action="store_true", help="ignore cached stages")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("synth", help="write the bundled synthetic language and a config")
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--language", default="SY")
    s.add_argument("--identity", action="store_true", help="target language = English")
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except (StageError, IntegrityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except (ConfigError, PenmanError, AlignmentFormatError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
