"""Data augmentation around a pluggable rewriter, and system evaluation."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from ._io import DataError, atomic_write, read_lines
from .corpus import CorpusSplit, PseudoPair, subselect_by_edit_distance
from .formality import LinearFormalityModel, predict_formality
from .lm import FluencyCalibration, NgramLanguageModel, calibrate_fluency, cross_entropy, fluency_from_entropy
from .metrics import (PROXY_RANGES, JudgmentRecord, bleu, combined_score, meaning_proxy,
                      overall_rank, paired_bootstrap, pinc, sentence_bleu, ter)
from .rules import ReverseRuleProbabilities, RuleLexicons, formalize, informalize
from .textcore import TokenizedSentence, tokenize

SELF_TRAIN = "self_train"
BACK_TRANSLATION = "back_translation"


def parallel_map(fn: Callable, items: Sequence, threads: int = 1) -> list:
    """Order-preserving map; results never depend on ``threads``."""
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (threads * 4))))


@dataclass
class Rewriter:
    """Either the built-in rule engine or a file of precomputed outputs.

    ``kind`` is ``internal_rules`` (with ``direction`` ``formal`` or
    ``informal``) or ``external_outputs`` (with ``path`` holding one rewrite
    per input line).
    """

    kind: str
    direction: str = "formal"
    path: str | None = None
    lexicons: RuleLexicons | None = None
    probs: ReverseRuleProbabilities = field(default_factory=ReverseRuleProbabilities)

    def __post_init__(self):
        if self.kind not in ("internal_rules", "external_outputs"):
            raise ValueError(f"unknown rewriter kind {self.kind!r}")
        if self.kind == "external_outputs" and self.path is None:
            raise ValueError("external rewriter needs a path")
        if self.direction not in ("formal", "informal"):
            raise ValueError(f"direction must be 'formal' or 'informal', got {self.direction!r}")

    @classmethod
    def rules(cls, direction: str = "formal", lexicons: RuleLexicons | None = None,
              probs: ReverseRuleProbabilities | None = None) -> "Rewriter":
        return cls("internal_rules", direction, None, lexicons, probs or ReverseRuleProbabilities())

    @classmethod
    def external(cls, path) -> "Rewriter":
        return cls("external_outputs", path=str(path))

    def rewrite_all(self, sentences: Sequence[TokenizedSentence], ids: Sequence[str] | None = None,
                    threads: int = 1) -> list[TokenizedSentence]:
        if self.kind == "external_outputs":
            lines = read_lines(self.path)
            if len(lines) != len(sentences):
                raise DataError(
                    f"{self.path}: {len(lines)} lines for {len(sentences)} inputs "
                    f"(first unaligned line {min(len(lines), len(sentences)) + 1})")
            return [tokenize(line) for line in lines]
        lex = self.lexicons or RuleLexicons.default()
        if self.direction == "formal":
            return parallel_map(lambda s: formalize(s, lex), sentences, threads)
        ids = [str(i) for i in range(len(sentences))] if ids is None else list(ids)
        return parallel_map(lambda p: informalize(p[0], lex, self.probs, p[1]),
                            list(zip(sentences, ids)), threads)


def self_train_round(rewriter: Rewriter, monolingual_source: Sequence[TokenizedSentence],
                     min_edit: int = 10, threads: int = 1) -> list[PseudoPair]:
    """Rewrite source-style sentences and keep pairs more than ``min_edit`` characters apart."""
    rewrites = rewriter.rewrite_all(monolingual_source, threads=threads)
    pairs = [PseudoPair(f"st-{i}", s, r, SELF_TRAIN)
             for i, (s, r) in enumerate(zip(monolingual_source, rewrites))]
    return subselect_by_edit_distance(pairs, min_edit)


def back_translate(reverse_rewriter: Rewriter, target_monolingual: Sequence[TokenizedSentence],
                   threads: int = 1) -> list[PseudoPair]:
    """Synthesise sources for authentic target-style sentences; the synthetic side is the source."""
    rewrites = reverse_rewriter.rewrite_all(target_monolingual, threads=threads)
    return [PseudoPair(f"bt-{i}", r, t, BACK_TRANSLATION)
            for i, (t, r) in enumerate(zip(target_monolingual, rewrites))]


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------

ORIGINAL = "Original"
REFERENCE = "Reference"
SENTENCE_METRICS = ("formality", "fluency", "meaning", "combined", "bleu", "ter", "pinc")


@dataclass
class ScorerConfig:
    formality_model: LinearFormalityModel | None = None
    lm: NgramLanguageModel | None = None
    fluency_calibration: FluencyCalibration | None = None
    ranges: Mapping[str, tuple[float, float]] = field(default_factory=lambda: dict(PROXY_RANGES))
    baseline: str | None = None
    bootstrap_resamples: int = 1000
    alpha: float = 0.001
    seed: int = 0
    threads: int = 1
    judgments: Sequence[JudgmentRecord] | None = None


@dataclass
class SystemScores:
    system: str
    formality: float | None
    fluency: float | None
    meaning: float | None
    combined: float | None
    bleu: float
    ter: float
    pinc: float
    overall_rank: float | None = None
    significant: dict[str, bool] = field(default_factory=dict)


@dataclass
class EvaluationReport:
    systems: list[SystemScores]
    sentences: list[dict]
    labels: dict = field(default_factory=lambda: {
        "fluency": "fluency (LM proxy)", "meaning": "meaning (lexical proxy)", "ter": "TER"})
    baseline: str | None = None

    def system(self, name: str) -> SystemScores:
        for s in self.systems:
            if s.system == name:
                return s
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"labels": self.labels, "baseline": self.baseline,
                "systems": [asdict(s) for s in self.systems], "sentences": self.sentences}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    def render(self) -> str:
        head = (f"{'System':<16} {'Formality':>9} {'Fluency(LM)':>12} {'Meaning(lex)':>12} {'Combined':>9} "
                f"{'BLEU':>7} {'TER':>6} {'PINC':>7} {'Rank':>6}")
        lines = [head, "-" * len(head)]

        def cell(v, width, fmt, metric, s):
            if v is None:
                return f"{'--':>{width}}"
            star = "*" if s.significant.get(metric) else ""
            return f"{format(v, fmt) + star:>{width}}"

        for s in self.systems:
            lines.append(
                f"{s.system:<16} {cell(s.formality, 9, '.2f', 'formality', s)} "
                f"{cell(s.fluency, 12, '.2f', 'fluency', s)} {cell(s.meaning, 12, '.2f', 'meaning', s)} "
                f"{cell(s.combined, 9, '.2f', 'combined', s)} {cell(s.bleu, 7, '.2f', 'bleu', s)} "
                f"{cell(s.ter, 6, '.2f', 'ter', s)} {cell(s.pinc, 7, '.2f', 'pinc', s)} "
                f"{cell(s.overall_rank, 6, '.2f', 'rank', s)}")
        lines.append(f"Fluency(LM) = {self.labels['fluency']}; Meaning(lex) = {self.labels['meaning']}")
        if self.baseline:
            lines.append(f"* significantly different from {self.baseline} "
                         f"(paired bootstrap over sentence scores)")
        return "\n".join(lines) + "\n"

    def sentence_scores_tsv(self) -> str:
        out = []
        for row in self.sentences:
            for metric in SENTENCE_METRICS:
                v = row.get(metric)
                if v is not None:
                    out.append(f"{row['sentence_id']}\t{row['system']}\t{metric}\t{v!r}")
        return "\n".join(out) + ("\n" if out else "")


def _load_outputs(name: str, outputs, n: int) -> list[TokenizedSentence]:
    if isinstance(outputs, (str, Path)):
        lines = read_lines(outputs)
        if len(lines) != n:
            raise DataError(
                f"system {name!r} ({outputs}): {len(lines)} lines but the test set has {n}; "
                f"misaligned at line {min(len(lines), n) + 1}")
        return [tokenize(line) for line in lines]
    outs = [s if isinstance(s, TokenizedSentence) else tokenize(s) for s in outputs]
    if len(outs) != n:
        raise DataError(f"system {name!r}: {len(outs)} outputs but the test set has {n}; "
                        f"misaligned at line {min(len(outs), n) + 1}")
    return outs


def evaluate_systems(testset: CorpusSplit, system_outputs: Mapping[str, object],
                     config: ScorerConfig = ScorerConfig()) -> EvaluationReport:
    """Score every system (plus Original and Reference rows) against a multi-reference test set."""
    examples = testset.examples
    if not examples:
        raise DataError("empty test set")
    n = len(examples)
    sources = [ex.source for ex in examples]
    refs = [ex.references for ex in examples]
    ids = [ex.id for ex in examples]

    calibration = config.fluency_calibration
    if config.lm is not None and calibration is None:
        calibration = calibrate_fluency(config.lm, [r for rs in refs for r in rs])

    rows: list[tuple[str, list[TokenizedSentence], bool]] = [
        (ORIGINAL, sources, False), (REFERENCE, [r[0] for r in refs], True)]
    for name, outputs in system_outputs.items():
        if name in (ORIGINAL, REFERENCE):
            raise DataError(f"system name {name!r} is reserved")
        rows.append((name, _load_outputs(name, outputs, n), True))

    def score_sentence(args):
        i, out, with_meaning = args
        res = {"sentence_id": ids[i]}
        res["formality"] = (predict_formality(config.formality_model, out)
                            if config.formality_model is not None else None)
        if config.lm is not None and out.tokens:
            res["fluency"] = fluency_from_entropy(cross_entropy(config.lm, out), calibration)
        else:
            res["fluency"] = None
        res["meaning"] = meaning_proxy(sources[i], out) if with_meaning else None
        if None in (res["formality"], res["fluency"], res["meaning"]):
            res["combined"] = None
        else:
            res["combined"] = combined_score(res["formality"], res["fluency"], res["meaning"],
                                             config.ranges)
        res["bleu"] = sentence_bleu(out, refs[i])
        res["ter"] = ter(out, refs[i])
        res["pinc"] = pinc(sources[i], out) if out.tokens else 0.0
        return res

    ranks = overall_rank(config.judgments) if config.judgments else {}
    systems: list[SystemScores] = []
    sentence_rows: list[dict] = []
    per_system: dict[str, list[dict]] = {}
    for name, outs, with_meaning in rows:
        scored = parallel_map(score_sentence, [(i, o, with_meaning) for i, o in enumerate(outs)],
                              config.threads)
        for r in scored:
            r["system"] = name
        per_system[name] = scored
        sentence_rows.extend(scored)

        def mean(metric):
            vals = [r[metric] for r in scored]
            return None if any(v is None for v in vals) else float(np.mean(vals))

        systems.append(SystemScores(
            system=name, formality=mean("formality"), fluency=mean("fluency"),
            meaning=mean("meaning"), combined=mean("combined"),
            bleu=bleu(outs, refs), ter=mean("ter"), pinc=mean("pinc"),
            overall_rank=ranks.get(name)))

    if config.baseline is not None:
        if config.baseline not in per_system:
            raise DataError(f"baseline system {config.baseline!r} not evaluated")
        base = per_system[config.baseline]
        for s in systems:
            if s.system == config.baseline:
                continue
            for metric in SENTENCE_METRICS:
                a = [r[metric] for r in per_system[s.system]]
                b = [r[metric] for r in base]
                if None in a or None in b or n < 2:
                    continue
                p = paired_bootstrap(a, b, config.bootstrap_resamples, config.seed)
                s.significant[metric] = bool(p < config.alpha)
    return EvaluationReport(systems, sentence_rows, baseline=config.baseline)


def write_report(report: EvaluationReport, json_path=None, text_path=None,
                 sentence_scores_path=None) -> None:
    if json_path is not None:
        with atomic_write(json_path) as fh:
            fh.write(report.to_json())
    if text_path is not None:
        with atomic_write(text_path) as fh:
            fh.write(report.render())
    if sentence_scores_path is not None:
        with atomic_write(sentence_scores_path) as fh:
            fh.write(report.sentence_scores_tsv())
