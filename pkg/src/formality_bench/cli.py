"""Command-line entry point: ``formality-bench <subcommand> [flags]``.

Exit codes: 0 success, 1 usage error, 2 data error. Every output file is
written atomically, and all randomness flows from ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

from ._io import DataError, atomic_write, read_lines
from .corpus import (FilterConfig, PseudoPair, assemble_training_set, corpus_stats, filter_corpus,
                     load_gyafc_directory, partition_by_formality, read_monolingual, read_pairs,
                     read_parallel, write_monolingual, write_pairs, write_stats)
from .formality import (LinearFormalityModel, TrainingHyper, predict_formality_batch,
                        train_formality)
from .lm import NgramLanguageModel, SMOOTHING, moore_lewis_select, train_lm
from .metrics import correlate_report, read_auto_scores, read_judgments, render_correlation
from .pipeline import Rewriter, ScorerConfig, back_translate, evaluate_systems, self_train_round, write_report
from .rules import ReverseRuleProbabilities, RuleLexicons
from .textcore import tokenize

log = logging.getLogger("formality_bench")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting with status 2."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


_FMT = argparse.ArgumentDefaultsHelpFormatter


def _common() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    g = p.add_argument_group("common")
    g.add_argument("--seed", type=int, default=0, help="seed for every random choice")
    g.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="worker threads (output does not depend on this)")
    g.add_argument("--config", default=None,
                   help="JSON file whose keys match flag names; explicit flags win")
    g.add_argument("--verbose", action="store_true", help="log progress to stderr")
    return p


def _lexicon_flags(p):
    p.add_argument("--lexicon-dir", default=None,
                   help="directory with contractions.tsv, slang.tsv, swear.txt, proper_nouns.txt "
                        "(missing files fall back to the bundled lists)")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="formality-bench", formatter_class=_FMT,
                     description="Formality style-transfer corpus, rule and evaluation toolkit.")
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND", parser_class=_Parser)

    def add(name, help_):
        return sub.add_parser(name, help=help_, description=help_, parents=[common],
                              formatter_class=_FMT)

    p = add("filter", "Drop questions, URLs and sentences outside the length bounds.")
    p.add_argument("--in", dest="input", required=True, help="one sentence per line")
    p.add_argument("--out", required=True, help="kept sentences")
    p.add_argument("--rejects", default=None, help="optional TSV of reason<TAB>sentence")
    p.add_argument("--min-tokens", type=int, default=5, help="inclusive lower bound")
    p.add_argument("--max-tokens", type=int, default=25, help="inclusive upper bound")
    p.add_argument("--keep-questions", action="store_true", help="do not drop questions")
    p.add_argument("--keep-urls", action="store_true", help="do not drop sentences with URLs")

    p = add("partition", "Split sentences into informal and formal sides by model score.")
    p.add_argument("--in", dest="input", required=True, help="one sentence per line")
    p.add_argument("--model", required=True, help="formality model JSON")
    p.add_argument("--threshold", type=float, default=0.0,
                   help="scores below go informal, above go formal, equal are dropped")
    p.add_argument("--informal-out", required=True, help="informal side")
    p.add_argument("--formal-out", required=True, help="formal side")

    p = add("rewrite", "Apply the rule engine in either direction.")
    p.add_argument("--direction", choices=("formal", "informal"), required=True,
                   help="formal: informal-to-formal rules; informal: reverse rules")
    p.add_argument("--in", dest="input", required=True, help="one sentence per line")
    p.add_argument("--out", required=True, help="one rewrite per line")
    p.add_argument("--p-uppercase", type=float, default=0.08,
                   help="informal direction: probability of uppercasing one word")
    p.add_argument("--p-repetition", type=float, default=0.05,
                   help="informal direction: probability of character repetition")
    _lexicon_flags(p)

    p = add("train-formality", "Fit the ridge formality scorer.")
    p.add_argument("--in", dest="input", required=True, help="TSV of score<TAB>sentence")
    p.add_argument("--out", required=True, help="model JSON")
    p.add_argument("--epochs", type=int, default=1000, help="gradient-descent epochs")
    p.add_argument("--l2", type=float, default=1e-4, help="ridge penalty")
    p.add_argument("--rate", type=float, default=1.0, help="step size as a fraction of 1/L")
    _lexicon_flags(p)

    p = add("score-formality", "Score sentences with a trained formality model.")
    p.add_argument("--model", required=True, help="model JSON")
    p.add_argument("--in", dest="input", required=True, help="one sentence per line")
    p.add_argument("--out", required=True, help="one score per line")
    _lexicon_flags(p)

    p = add("train-lm", "Train an n-gram language model and write it as ARPA.")
    p.add_argument("--in", dest="inputs", action="append", required=True,
                   help="training file; repeat to mix several corpora")
    p.add_argument("--weight", dest="weights", action="append", type=int, default=None,
                   help="integer replication factor per --in (default 1 each)")
    p.add_argument("--order", type=int, default=5, help="n-gram order")
    p.add_argument("--smoothing", choices=SMOOTHING, default="kneser_ney", help="smoothing method")
    p.add_argument("--discount", type=float, default=0.75, help="Kneser-Ney absolute discount")
    p.add_argument("--out", required=True, help="ARPA file")

    p = add("select", "Moore-Lewis cross-entropy-difference selection.")
    p.add_argument("--in-lm", required=True, help="in-domain ARPA model")
    p.add_argument("--out-lm", required=True, help="general-domain ARPA model")
    p.add_argument("--pool", required=True, help="candidate sentences, one per line")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--top-k", type=int, help="keep the k lowest-scoring sentences")
    g.add_argument("--threshold", type=float, help="keep sentences scoring at most this")
    p.add_argument("--out", required=True, help="selected sentences in pool order")
    p.add_argument("--scores-out", default=None, help="optional TSV of index<TAB>score<TAB>sentence")

    p = add("augment", "Build pseudo-parallel data by self-training, back-translation or assembly.")
    p.add_argument("--mode", choices=("self-train", "back-translate", "assemble"), required=True,
                   help="augmentation regime")
    p.add_argument("--in", dest="input", default=None,
                   help="monolingual sentences (self-train: source style; back-translate: target style)")
    p.add_argument("--external", default=None,
                   help="precomputed rewrites, one per --in line (default: the rule engine)")
    p.add_argument("--direction", choices=("formal", "informal"), default=None,
                   help="rule direction (default: formal for self-train, informal for back-translate)")
    p.add_argument("--min-edit", type=int, default=10,
                   help="self-train keeps pairs more than this many characters apart")
    p.add_argument("--p-uppercase", type=float, default=0.08, help="reverse-rule uppercasing probability")
    p.add_argument("--p-repetition", type=float, default=0.05, help="reverse-rule repetition probability")
    p.add_argument("--base", default=None, help="assemble: base training pairs")
    p.add_argument("--base-format", choices=("pairs", "parallel"), default="pairs",
                   help="assemble: pairs TSV (id, source, target, provenance) or parallel TSV")
    p.add_argument("--dup", type=int, default=1, help="assemble: duplication factor for --base")
    p.add_argument("--extra", action="append", default=[], help="assemble: extra pairs files")
    p.add_argument("--out", required=True, help="pairs TSV")
    _lexicon_flags(p)

    p = add("evaluate", "Score system outputs against a multi-reference test set.")
    p.add_argument("--testset", required=True, help="TSV of id, source, ref1..ref4")
    p.add_argument("--system", action="append", default=[], metavar="NAME=PATH",
                   help="system outputs aligned with the test set; repeatable")
    p.add_argument("--formality-model", default=None, help="model JSON for the formality column")
    p.add_argument("--lm", default=None, help="ARPA model for the fluency proxy column")
    p.add_argument("--baseline", default=None, help="system to test every other system against")
    p.add_argument("--resamples", type=int, default=1000, help="paired-bootstrap resamples")
    p.add_argument("--alpha", type=float, default=0.001, help="significance level")
    p.add_argument("--judgments", default=None, help="judgments TSV for the overall-rank column")
    p.add_argument("--json-out", default=None, help="structured report")
    p.add_argument("--text-out", default=None, help="fixed-width table (stdout if no output given)")
    p.add_argument("--sentence-scores-out", default=None,
                   help="TSV of sentence_id, system_id, metric, value")

    p = add("correlate", "Spearman correlation of automatic metrics with human judgments.")
    p.add_argument("--auto-scores", required=True, help="TSV of sentence_id, system_id, metric, value")
    p.add_argument("--judgments", required=True, help="judgments TSV")
    p.add_argument("--alpha", type=float, default=0.001, help="significance level")
    p.add_argument("--json-out", default=None, help="structured report")
    p.add_argument("--text-out", default=None, help="fixed-width table (stdout if no output given)")

    p = add("stats", "Edit-distance, formality and length statistics of a parallel split.")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--testset", help="TSV of id, source, ref1..ref4")
    src.add_argument("--gyafc-dir", help="directory holding informal and formal[.refN] files")
    p.add_argument("--model", default=None, help="optional formality model JSON")
    p.add_argument("--json-out", default=None, help="statistics JSON")
    p.add_argument("--text-out", default=None, help="statistics text (stdout if no output given)")
    return parser


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------

_PATH_FLAGS = ("input", "model", "config", "lexicon_dir", "pool", "in_lm", "out_lm", "external",
               "base", "testset", "formality_model", "lm", "judgments", "auto_scores", "gyafc_dir")


def _check_paths(args) -> None:
    for name in _PATH_FLAGS:
        value = getattr(args, name, None)
        if value is not None and not Path(value).exists():
            raise DataError(f"--{name.replace('_', '-')}: {value} does not exist")
    for value in list(getattr(args, "inputs", None) or []) + list(getattr(args, "extra", None) or []):
        if not Path(value).exists():
            raise DataError(f"{value} does not exist")


def _lexicons(args) -> RuleLexicons:
    return RuleLexicons.from_dir(args.lexicon_dir) if args.lexicon_dir else RuleLexicons.default()


def _emit(text: str, path) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with atomic_write(path) as fh:
            fh.write(text)


def _write_lines(path, lines) -> None:
    with atomic_write(path) as fh:
        for line in lines:
            fh.write(f"{line}\n")


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_filter(args) -> None:
    cfg = FilterConfig(args.min_tokens, args.max_tokens, not args.keep_questions, not args.keep_urls)
    kept, rejected = filter_corpus(read_monolingual(args.input), cfg)
    write_monolingual(args.out, kept)
    if args.rejects:
        _write_lines(args.rejects, (f"{r.value}\t{s.raw}" for s, r in rejected))
    log.info("kept %d, rejected %d", len(kept), len(rejected))


def cmd_partition(args) -> None:
    model = LinearFormalityModel.load(args.model)
    informal, formal = partition_by_formality(read_monolingual(args.input), model, args.threshold)
    write_monolingual(args.informal_out, informal)
    write_monolingual(args.formal_out, formal)


def cmd_rewrite(args) -> None:
    probs = ReverseRuleProbabilities(args.p_uppercase, args.p_repetition, args.seed)
    rw = Rewriter.rules(args.direction, _lexicons(args), probs)
    sents = read_monolingual(args.input)
    ids = [str(i) for i in range(1, len(sents) + 1)]
    write_monolingual(args.out, rw.rewrite_all(sents, ids, args.threads))


def cmd_train_formality(args) -> None:
    sents, labels = [], []
    for lineno, line in enumerate(read_lines(args.input), start=1):
        if not line.strip():
            continue
        score, _, text = line.partition("\t")
        try:
            labels.append(float(score))
        except ValueError:
            raise DataError(f"{args.input}:{lineno}: bad score {score!r}") from None
        sents.append(tokenize(text))
    if not sents:
        raise DataError(f"{args.input}: no training examples")
    hyper = TrainingHyper(epochs=args.epochs, l2=args.l2, rate=args.rate)
    train_formality(sents, labels, hyper, _lexicons(args)).save(args.out)


def cmd_score_formality(args) -> None:
    model = LinearFormalityModel.load(args.model)
    scores = predict_formality_batch(model, read_monolingual(args.input), _lexicons(args))
    _write_lines(args.out, (repr(float(s)) for s in scores))


def cmd_train_lm(args) -> None:
    weights = args.weights or [1] * len(args.inputs)
    if len(weights) != len(args.inputs):
        raise UsageError("give one --weight per --in (or none)")
    if any(w < 1 for w in weights):
        raise UsageError("--weight values must be >= 1")
    corpus = []
    for path, w in zip(args.inputs, weights):
        corpus.extend(read_monolingual(path) * w)
    train_lm(corpus, args.order, args.smoothing, args.discount).write_arpa(args.out)


def cmd_select(args) -> None:
    in_lm = NgramLanguageModel.read_arpa(args.in_lm)
    out_lm = NgramLanguageModel.read_arpa(args.out_lm)
    pool = read_monolingual(args.pool)
    chosen = moore_lewis_select(in_lm, out_lm, pool, args.top_k, args.threshold)
    write_monolingual(args.out, [c.sentence for c in chosen])
    if args.scores_out:
        _write_lines(args.scores_out, (f"{c.index}\t{c.score!r}\t{c.sentence.raw}" for c in chosen))


def cmd_augment(args) -> None:
    if args.mode == "assemble":
        if args.base is None:
            raise UsageError("--mode assemble needs --base")
        if args.base_format == "pairs":
            base = read_pairs(args.base)
        else:
            split = read_parallel(args.base, "train")
            base = [PseudoPair(ex.id, ex.source, ex.references[0], "base") for ex in split.examples]
        extras = [read_pairs(p) for p in args.extra]
        write_pairs(args.out, assemble_training_set(base, args.dup, *extras))
        return
    if args.input is None:
        raise UsageError(f"--mode {args.mode} needs --in")
    mono = read_monolingual(args.input)
    if args.external:
        rw = Rewriter.external(args.external)
    else:
        default = "formal" if args.mode == "self-train" else "informal"
        probs = ReverseRuleProbabilities(args.p_uppercase, args.p_repetition, args.seed)
        rw = Rewriter.rules(args.direction or default, _lexicons(args), probs)
    if args.mode == "self-train":
        pairs = self_train_round(rw, mono, args.min_edit, args.threads)
    else:
        pairs = back_translate(rw, mono, args.threads)
    write_pairs(args.out, pairs)


def cmd_evaluate(args) -> None:
    testset = read_parallel(args.testset, "test")
    outputs = {}
    for spec in args.system:
        name, sep, path = spec.partition("=")
        if not sep or not name or not path:
            raise UsageError(f"--system expects NAME=PATH, got {spec!r}")
        if name in outputs:
            raise UsageError(f"duplicate system name {name!r}")
        if not Path(path).exists():
            raise DataError(f"--system {name}: {path} does not exist")
        outputs[name] = path
    config = ScorerConfig(
        formality_model=LinearFormalityModel.load(args.formality_model) if args.formality_model else None,
        lm=NgramLanguageModel.read_arpa(args.lm) if args.lm else None,
        baseline=args.baseline,
        bootstrap_resamples=args.resamples,
        alpha=args.alpha,
        seed=args.seed,
        threads=args.threads,
        judgments=read_judgments(args.judgments) if args.judgments else None,
    )
    report = evaluate_systems(testset, outputs, config)
    write_report(report, args.json_out, args.text_out, args.sentence_scores_out)
    if not (args.json_out or args.text_out or args.sentence_scores_out):
        sys.stdout.write(report.render())


def cmd_correlate(args) -> None:
    doc = correlate_report(read_auto_scores(args.auto_scores), read_judgments(args.judgments), args.alpha)
    if args.json_out:
        with atomic_write(args.json_out) as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    if args.text_out or not args.json_out:
        _emit(render_correlation(doc), args.text_out)


def cmd_stats(args) -> None:
    if args.testset:
        split = read_parallel(args.testset, "test")
    else:
        split = load_gyafc_directory(args.gyafc_dir, Path(args.gyafc_dir).name or "split")
    model = LinearFormalityModel.load(args.model) if args.model else None
    try:
        stats = corpus_stats(split, model)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    write_stats(stats, args.json_out, args.text_out)
    if not (args.json_out or args.text_out):
        sys.stdout.write(stats.to_text())


COMMANDS = {
    "filter": cmd_filter, "partition": cmd_partition, "rewrite": cmd_rewrite,
    "train-formality": cmd_train_formality, "score-formality": cmd_score_formality,
    "train-lm": cmd_train_lm, "select": cmd_select, "augment": cmd_augment,
    "evaluate": cmd_evaluate, "correlate": cmd_correlate, "stats": cmd_stats,
}


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    """Parse ``argv``; keys of an optional ``--config`` JSON file act as flag defaults."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, rest = pre.parse_known_args(argv)
    command = next((a for a in rest if not a.startswith("-")), None)
    choices = parser._subparsers._group_actions[0].choices
    if known.config and command in choices:
        try:
            with open(known.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise DataError(f"--config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise DataError(f"--config {known.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise DataError(f"--config {known.config}: expected a JSON object")
        sub = choices[command]
        # keys may name either the flag ("in", "json-out") or its destination ("input")
        by_key = {a.dest: a for a in sub._actions}
        for a in sub._actions:
            for opt in a.option_strings:
                by_key[opt.lstrip("-").replace("-", "_")] = a
        defaults = {}
        for key, value in cfg.items():
            action = by_key.get(key.replace("-", "_"))
            if action is None or action.dest in ("config", "help"):
                raise UsageError(f"--config: unknown key {key!r} for {command}")
            defaults[action.dest] = value
            action.required = False
        for group in sub._mutually_exclusive_groups:
            if any(a.dest in defaults for a in group._group_actions):
                group.required = False
        sub.set_defaults(**defaults)
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError(parser.format_usage() + "formality-bench: error: a subcommand is required")
    return args


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        _check_paths(args)
        COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return 1
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    except (DataError, OSError, UnicodeDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
