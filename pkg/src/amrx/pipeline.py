"""Config-driven experiment runner with content-hash manifests.

Every stage writes its artifacts plus ``<stage>.manifest.json`` recording the
hashes of its inputs and outputs, its parameters and the package version. A
later run skips a stage whose manifest still matches, recomputes it when an
input changed or an output is missing, and refuses to continue when an
output on disk no longer matches the hash it was written with.
"""
from __future__ import annotations

import hashlib
import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .amralign import AmrAlignment, align_concepts, write_sidecar
from .evaluation import (ExperimentRecord, check_disjoint, evaluate_gold, evaluate_mt_gold, evaluate_mt_silver,
                         evaluate_silver, format_records, project_through)
from .graph import read_corpus, write_corpus
from .mt import DictionaryTranslator, FileTranslator, FORWARD, BACKWARD, back_translate
from .parser import ParserModel, parse_sentence, train_parser
from .projection import ProjectedExample
from .smatch import smatch_corpus
from .wordalign import (AlignerModel, BidirectionalAligner, SentencePair, identity_alignment, read_bitext,
                        read_pharaoh, write_pharaoh)

log = logging.getLogger(__name__)

SPLITS = ("train", "dev", "test")
DIRECTIONS = (FORWARD, BACKWARD)


class ConfigError(ValueError):
    pass


class IntegrityError(RuntimeError):
    pass


class StageError(RuntimeError):
    def __init__(self, stage: str, artifact, cause: Exception):
        super().__init__(f"stage {stage!r} failed ({artifact}): {cause}")
        self.stage = stage
        self.artifact = artifact
        self.cause = cause


def sub_seed(seed: int, name: str) -> int:
    """Independent deterministic seed for a named consumer of randomness."""
    digest = hashlib.sha256(f"{seed}:{name}".encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big")


def file_hash(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


# -- configuration ---------------------------------------------------------

_PATH_KEYS = ("english_train", "english_test", "target_gold", "bitext_source", "bitext_target", "lexicon",
              "e2f_source", "e2f_output", "f2e_source", "f2e_output", "output_dir")
_INT_KEYS = ("train_size", "dev_size", "test_size", "seed", "aligner_iterations", "restarts")


@dataclass
class PipelineConfig:
    english_train: Path | None = None
    english_test: Path | None = None
    bitext_source: Path | None = None
    bitext_target: Path | None = None
    target_gold: Path | None = None
    lexicon: Path | None = None
    e2f_source: Path | None = None
    e2f_output: Path | None = None
    f2e_source: Path | None = None
    f2e_output: Path | None = None
    output_dir: Path = Path("run")
    language: str = "XX"
    system: str = "projection"
    train_size: int = 200
    dev_size: int = 25
    test_size: int = 50
    split_strategy: str = "head"
    seed: int = 0
    aligner: str = "diagonal"
    symmetrization: str = "intersect"
    aligner_iterations: int = 5
    restarts: int = 4

    @classmethod
    def from_file(cls, path, overrides: dict | None = None) -> "PipelineConfig":
        path = Path(path)
        values = {}
        for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            values[key.strip()] = value.strip()
        values.update(overrides or {})
        return cls.from_dict(values, path.parent)

    @classmethod
    def from_dict(cls, values: dict, base_dir=Path(".")) -> "PipelineConfig":
        known = set(cls.__dataclass_fields__)
        kwargs = {}
        for key, value in values.items():
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            if key in _PATH_KEYS:
                p = Path(value)
                kwargs[key] = p if p.is_absolute() else Path(base_dir) / p
            elif key in _INT_KEYS:
                try:
                    kwargs[key] = int(value)
                except ValueError:
                    raise ConfigError(f"{key} must be an integer, got {value!r}") from None
            else:
                kwargs[key] = value
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    @property
    def sizes(self) -> tuple:
        return self.train_size, self.dev_size, self.test_size

    def validate(self) -> None:
        if min(self.sizes) <= 0:
            raise ConfigError("split sizes must be positive")
        if self.restarts < 1 or self.aligner_iterations < 1:
            raise ConfigError("restarts and aligner_iterations must be >= 1")
        if self.system not in ("projection", "mt-file", "mt-dict"):
            raise ConfigError(f"unknown system {self.system!r}")
        if self.aligner not in ("diagonal", "model1", "identity"):
            raise ConfigError(f"unknown aligner {self.aligner!r}")
        if self.symmetrization not in ("intersect", "union"):
            raise ConfigError(f"unknown symmetrization {self.symmetrization!r}")
        if self.split_strategy not in ("head", "random"):
            raise ConfigError(f"unknown split strategy {self.split_strategy!r}")
        required = ["english_train", "english_test", "bitext_source", "bitext_target"]
        if self.system == "mt-dict":
            required.append("lexicon")
        if self.system == "mt-file":
            required += ["e2f_source", "e2f_output", "f2e_source", "f2e_output"]
        for key in required:
            if getattr(self, key) is None:
                raise ConfigError(f"missing required config key {key!r}")
        for key in _PATH_KEYS:
            p = getattr(self, key)
            if key != "output_dir" and p is not None and not p.exists():
                raise ConfigError(f"{key}: no such file {p}")

    def params(self) -> dict:
        return {k: str(v) for k, v in sorted(vars(self).items()) if k not in _PATH_KEYS}


# -- splitting -------------------------------------------------------------

def ingest_and_split(pairs: Sequence[SentencePair], sizes, seed: int = 0, strategy: str = "head") -> dict:
    """Two (train, dev, test) triples, one per projection direction.

    The f2e triple is stored target -> English. Raises when data is short or
    a sentence pair would land in two splits.
    """
    sizes = tuple(sizes)
    if len(sizes) != 3 or min(sizes) <= 0:
        raise ValueError("need three positive split sizes")
    per_dir = sum(sizes)
    if len(pairs) < 2 * per_dir:
        raise ValueError(f"insufficient data: {len(pairs)} pairs, need {2 * per_dir}")
    order = list(range(len(pairs)))
    if strategy == "random":
        random.Random(seed).shuffle(order)
    elif strategy != "head":
        raise ValueError(f"unknown split strategy {strategy!r}")
    out = {}
    named = {}
    for d, direction in enumerate(DIRECTIONS):
        start = d * per_dir
        splits = []
        for name, size in zip(SPLITS, sizes):
            chunk = [pairs[i] for i in order[start:start + size]]
            start += size
            named[f"{direction}.{name}"] = chunk
            splits.append(chunk if direction == FORWARD else [p.reversed() for p in chunk])
        out[direction] = tuple(splits)
    check_disjoint(named)
    return out


def write_split(pairs: Sequence[SentencePair], prefix) -> None:
    Path(f"{prefix}.src").write_text("".join(" ".join(p.source) + "\n" for p in pairs), encoding="utf-8")
    Path(f"{prefix}.tgt").write_text("".join(" ".join(p.target) + "\n" for p in pairs), encoding="utf-8")


def read_split(prefix) -> list:
    return read_bitext(f"{prefix}.src", f"{prefix}.tgt")


def split_files(directory, direction: str, split: str) -> list:
    prefix = Path(directory) / f"{direction}.{split}"
    return [Path(f"{prefix}.src"), Path(f"{prefix}.tgt")]


# -- projected corpora -----------------------------------------------------

def write_projected(examples: Sequence[ProjectedExample], path) -> None:
    write_corpus([ex.to_entry() for ex in examples], path)


def read_projected(path) -> list:
    out = []
    for entry in read_corpus(path):
        alignment = AmrAlignment.parse(entry.metadata.get("alignments", ""), "|")
        out.append(ProjectedExample(tuple(entry.tokens), entry.graph, alignment, entry.id))
    return out


def save_aligner(aligner: BidirectionalAligner, prefix) -> None:
    aligner.forward.save(f"{prefix}.fwd")
    aligner.backward.save(f"{prefix}.bwd")


def load_aligner(prefix, method: str = "intersect") -> BidirectionalAligner:
    return BidirectionalAligner(AlignerModel.load(f"{prefix}.fwd"), AlignerModel.load(f"{prefix}.bwd"), method)


# -- stage runner ----------------------------------------------------------

@dataclass
class Stage:
    name: str
    inputs: list
    outputs: list
    run: Callable[[], None]
    params: dict = field(default_factory=dict)


class Runner:
    def __init__(self, out_dir, force: bool = False):
        self.out_dir = Path(out_dir)
        self.manifest_dir = self.out_dir / "manifests"
        self.force = force
        self.executed: list = []
        self.skipped: list = []

    def _rel(self, p) -> str:
        p = Path(p)
        try:
            return p.resolve().relative_to(self.out_dir.resolve()).as_posix()
        except ValueError:
            return str(p)

    def manifest_path(self, name: str) -> Path:
        return self.manifest_dir / f"{name}.manifest.json"

    def _up_to_date(self, stage: Stage, inputs: dict) -> bool:
        path = self.manifest_path(stage.name)
        if self.force or not path.exists():
            return False
        manifest = json.loads(path.read_text(encoding="utf-8"))
        if (manifest.get("inputs") != inputs or manifest.get("params") != stage.params
                or manifest.get("version") != __version__):
            return False
        if not all(Path(p).exists() for p in stage.outputs):
            return False
        for p in stage.outputs:
            expected = manifest["outputs"].get(self._rel(p))
            if expected != file_hash(p):
                raise IntegrityError(f"hash mismatch: {p} was modified after stage {stage.name!r} wrote it")
        return True

    def __call__(self, stage: Stage) -> None:
        for p in stage.inputs:
            if not Path(p).exists():
                raise StageError(stage.name, p, FileNotFoundError("missing input"))
        inputs = {self._rel(p): file_hash(p) for p in stage.inputs}
        if self._up_to_date(stage, inputs):
            log.info("stage %s up to date", stage.name)
            self.skipped.append(stage.name)
            return
        log.info("running stage %s", stage.name)
        for p in stage.outputs:
            Path(p).parent.mkdir(parents=True, exist_ok=True)
        try:
            stage.run()
        except (IntegrityError, StageError):
            raise
        except Exception as exc:
            artifact = stage.outputs[0] if stage.outputs else self.out_dir
            raise StageError(stage.name, artifact, exc) from exc
        manifest = {
            "stage": stage.name,
            "version": __version__,
            "params": stage.params,
            "inputs": inputs,
            "outputs": {self._rel(p): file_hash(p) for p in stage.outputs},
        }
        self.manifest_dir.mkdir(parents=True, exist_ok=True)
        self.manifest_path(stage.name).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                                  encoding="utf-8")
        self.executed.append(stage.name)


# -- the experiment --------------------------------------------------------

@dataclass
class RunResult:
    record: ExperimentRecord
    scores: dict
    report_path: Path
    executed: list
    skipped: list


def _english_alignments(corpus) -> list:
    return [align_concepts(e.tokens, e.graph) for e in corpus]


def run_experiment(cfg: PipelineConfig, force: bool = False) -> RunResult:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    runner = Runner(out, force)
    splits_dir = out / "splits"
    models = out / "models"
    align_dir = out / "alignments"
    silver = out / "silver"
    reports = out / "reports"
    restarts = cfg.restarts
    smatch_seed = sub_seed(cfg.seed, "smatch")

    split_outputs = [f for d in DIRECTIONS for s in SPLITS for f in split_files(splits_dir, d, s)]

    def do_ingest():
        pairs = read_bitext(cfg.bitext_source, cfg.bitext_target)
        result = ingest_and_split(pairs, cfg.sizes, sub_seed(cfg.seed, "ingest"), cfg.split_strategy)
        for direction, triple in result.items():
            for name, chunk in zip(SPLITS, triple):
                write_split(chunk, splits_dir / f"{direction}.{name}")

    runner(Stage("ingest", [cfg.bitext_source, cfg.bitext_target], split_outputs, do_ingest,
                 {"sizes": list(cfg.sizes), "strategy": cfg.split_strategy, "seed": cfg.seed}))

    english_parser_path = models / "english.parser"
    english_align = align_dir / "english_train.align"

    def do_align_amr():
        corpus = read_corpus(cfg.english_train)
        alignments = _english_alignments(corpus)
        write_sidecar(alignments, english_align)
        train_parser(ProjectedExample(tuple(e.tokens), e.graph, a, e.id)
                     for e, a in zip(corpus, alignments)).save(english_parser_path)

    runner(Stage("align-amr", [cfg.english_train], [english_align, english_parser_path], do_align_amr))

    record_path = reports / "record.tsv"
    scores_path = reports / "scores.json"
    if cfg.system == "projection":
        eval_inputs = _run_projection(cfg, runner, splits_dir, models, align_dir, silver, english_parser_path)
        stage_inputs = eval_inputs + split_outputs + [cfg.english_test]
    else:
        stage_inputs = split_outputs + [english_parser_path, cfg.english_test]
        if cfg.system == "mt-dict":
            stage_inputs.append(cfg.lexicon)
        else:
            stage_inputs += [cfg.e2f_source, cfg.e2f_output, cfg.f2e_source, cfg.f2e_output]
    if cfg.target_gold is not None:
        stage_inputs.append(cfg.target_gold)

    def do_evaluate():
        scores = _evaluate(cfg, splits_dir, models, english_parser_path, restarts, smatch_seed)
        scores_path.write_text(json.dumps(scores, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        rec = ExperimentRecord(cfg.language, cfg.system, scores["silver"]["f1"],
                               scores["gold"]["f1"] if "gold" in scores else 0.0, scores["cycle"]["f1"])
        record_path.write_text(format_records([rec]), encoding="utf-8")

    runner(Stage("evaluate", stage_inputs, [scores_path, record_path], do_evaluate,
                 {"restarts": restarts, "seed": cfg.seed, "system": cfg.system}))
    scores = json.loads(scores_path.read_text(encoding="utf-8"))
    rec = ExperimentRecord(cfg.language, cfg.system, scores["silver"]["f1"],
                           scores["gold"]["f1"] if "gold" in scores else 0.0, scores["cycle"]["f1"])
    return RunResult(rec, scores, record_path, runner.executed, runner.skipped)


def _run_projection(cfg, runner, splits_dir, models, align_dir, silver, english_parser_path) -> list:
    ef_align = align_dir / "e2f.train.align"
    fe_align = align_dir / "f2e.train.align"
    ef_files = split_files(splits_dir, FORWARD, "train")
    fe_files = split_files(splits_dir, BACKWARD, "train")
    aligner_outputs = [ef_align, fe_align]
    if cfg.aligner != "identity":
        aligner_outputs += [models / f"aligner.{d}.{s}" for d in DIRECTIONS for s in ("fwd", "bwd")]

    def do_align_words():
        for direction, files, target in ((FORWARD, ef_files, ef_align), (BACKWARD, fe_files, fe_align)):
            pairs = read_bitext(*files)
            if cfg.aligner == "identity":
                alignments = [identity_alignment(p) for p in pairs]
            else:
                aligner = BidirectionalAligner.train(pairs, cfg.aligner_iterations, cfg.aligner, cfg.symmetrization)
                save_aligner(aligner, models / f"aligner.{direction}")
                alignments = [aligner.align(p) for p in pairs]
            write_pharaoh(alignments, target)

    runner(Stage("align-words", ef_files + fe_files, aligner_outputs, do_align_words,
                 {"aligner": cfg.aligner, "iterations": cfg.aligner_iterations,
                  "symmetrization": cfg.symmetrization}))

    target_parser_path = models / "target.parser"
    cycle_parser_path = models / "cycle.parser"
    passes = (
        ("project-e2f", "train-target", english_parser_path, ef_files, ef_align, FORWARD, True, target_parser_path),
        ("project-f2e", "train-cycle", target_parser_path, fe_files, fe_align, BACKWARD, False, cycle_parser_path),
    )
    for proj_name, train_name, parser_path, files, align_path, direction, english_src, out_model in passes:
        src_amr = silver / f"{direction}.source.amr"
        projected = silver / f"{direction}.projected.amr"
        stats_path = silver / f"{direction}.projection.tsv"

        def do_project(parser_path=parser_path, files=files, align_path=align_path, english_src=english_src,
                       src_amr=src_amr, projected=projected, stats_path=stats_path):
            parser = ParserModel.load(parser_path)
            pairs = read_bitext(*files)
            alignments = read_pharaoh(align_path)
            entries, examples, stats = project_through(parser, pairs, alignments, english_src)
            write_corpus(entries, src_amr)
            write_projected(examples, projected)
            stats_path.write_text(stats.format_tsv(), encoding="utf-8")

        runner(Stage(proj_name, [parser_path, align_path] + files, [src_amr, projected, stats_path], do_project))

        def do_train(projected=projected, out_model=out_model):
            train_parser(read_projected(projected)).save(out_model)

        runner(Stage(train_name, [projected], [out_model], do_train))
    return [english_parser_path, target_parser_path, cycle_parser_path]


def _translator(cfg):
    if cfg.system == "mt-dict":
        return DictionaryTranslator.from_file(cfg.lexicon)
    return FileTranslator({FORWARD: (cfg.e2f_source, cfg.e2f_output), BACKWARD: (cfg.f2e_source, cfg.f2e_output)})


def _result_dict(res) -> dict:
    return {"precision": res.precision, "recall": res.recall, "f1": res.f1,
            "matched": res.matched, "gold_total": res.gold_total, "pred_total": res.pred_total}


def _evaluate(cfg, splits_dir, models, english_parser_path, restarts, seed) -> dict:
    english = ParserModel.load(english_parser_path)
    test = read_split(splits_dir / f"{FORWARD}.test")
    training = {f"{d}.{s}": [p if d == FORWARD else p.reversed() for p in read_split(splits_dir / f"{d}.{s}")]
                for d in DIRECTIONS for s in ("train", "dev")}
    english_test = read_corpus(cfg.english_test)
    target_gold = read_corpus(cfg.target_gold) if cfg.target_gold is not None else None
    scores = {}
    if cfg.system == "projection":
        target = ParserModel.load(models / "target.parser")
        cycle = ParserModel.load(models / "cycle.parser")
        scores["silver"] = _result_dict(evaluate_silver(english, target, test, training, restarts, seed))
        if target_gold is not None:
            scores["gold"] = _result_dict(evaluate_gold(target, target_gold, restarts, seed))
        scores["cycle"] = _result_dict(evaluate_gold(cycle, english_test, restarts, seed))
        scores["english_baseline"] = _result_dict(evaluate_gold(english, english_test, restarts, seed))
    else:
        translator = _translator(cfg)
        scores["silver"] = _result_dict(evaluate_mt_silver(english, translator, test, training, restarts, seed))
        if target_gold is not None:
            scores["gold"] = _result_dict(evaluate_mt_gold(english, translator, target_gold, restarts, seed))
        noisy = back_translate(translator, [e.snt for e in english_test])
        preds = [parse_sentence(s.split(), english) for s in noisy]
        scores["cycle"] = _result_dict(smatch_corpus(preds, [e.graph for e in english_test], restarts, seed))
    return scores
