"""Back-off n-gram language model, Moore-Lewis selection and an LM fluency proxy.

Models are held in ARPA form: a log10 probability for every stored n-gram
and a log10 back-off weight for every context. Training computes
interpolated Kneser-Ney (fixed discount) or interpolated Witten-Bell
estimates directly into that form, so the in-memory model and an ARPA file
are queried by the same code.
"""

from __future__ import annotations

import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import expit

from ._io import DataError, atomic_write
from .textcore import TokenizedSentence, tokenize

log = logging.getLogger(__name__)

BOS, EOS, UNK = "<s>", "</s>", "<unk>"
NO_PROB = -99.0
SMOOTHING = ("kneser_ney", "witten_bell")


def _as_tokens(s) -> tuple[str, ...]:
    if isinstance(s, TokenizedSentence):
        return s.tokens
    if isinstance(s, str):
        return tokenize(s).tokens
    return tuple(s)


@dataclass
class NgramLanguageModel:
    order: int
    logprobs: dict[tuple[str, ...], float]
    backoffs: dict[tuple[str, ...], float] = field(default_factory=dict)
    smoothing: str = "external"

    def __post_init__(self):
        self.vocab = frozenset(g[0] for g in self.logprobs if len(g) == 1 and g[0] != BOS)
        if UNK not in self.vocab:
            raise DataError("language model has no <unk> entry")

    # -- querying ----------------------------------------------------------

    def log10_prob(self, word: str, context: Sequence[str] = ()) -> float:
        """log10 p(word | context) with standard ARPA back-off."""
        if word not in self.vocab:
            word = UNK
        ctx = tuple(w if w in self.vocab or w == BOS else UNK for w in context)
        ctx = ctx[len(ctx) - (self.order - 1):] if self.order > 1 else ()
        penalty = 0.0
        for start in range(len(ctx) + 1):
            h = ctx[start:]
            p = self.logprobs.get(h + (word,))
            if p is not None:
                return p + penalty
            penalty += self.backoffs.get(h, 0.0)
        raise AssertionError("unreachable: every vocabulary word has a unigram")

    def token_log10_probs(self, tokens: Sequence[str]) -> list[float]:
        history = [BOS]
        out = []
        for w in list(tokens) + [EOS]:
            out.append(self.log10_prob(w, history))
            history.append(w)
        return out

    def prediction_vocab(self) -> list[str]:
        return sorted(self.vocab)

    # -- ARPA ----------------------------------------------------------------

    def write_arpa(self, path) -> None:
        by_order: dict[int, list] = defaultdict(list)
        for g, p in self.logprobs.items():
            by_order[len(g)].append(g)
        with atomic_write(path) as fh:
            fh.write(f"# smoothing={self.smoothing} order={self.order}\n\n\\data\\\n")
            for k in range(1, self.order + 1):
                fh.write(f"ngram {k}={len(by_order[k])}\n")
            for k in range(1, self.order + 1):
                fh.write(f"\n\\{k}-grams:\n")
                for g in sorted(by_order[k]):
                    line = f"{self.logprobs[g]!r}\t{' '.join(g)}"
                    if k < self.order and g in self.backoffs:
                        line += f"\t{self.backoffs[g]!r}"
                    fh.write(line + "\n")
            fh.write("\n\\end\\\n")

    @classmethod
    def read_arpa(cls, path) -> "NgramLanguageModel":
        logprobs: dict[tuple[str, ...], float] = {}
        backoffs: dict[tuple[str, ...], float] = {}
        smoothing = "external"
        declared: dict[int, int] = {}
        section = None
        in_data = False
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                if section is None and not in_data:
                    if line.startswith("# smoothing="):
                        smoothing = line.split()[1].split("=", 1)[1]
                    if line == "\\data\\":
                        in_data = True
                    continue
                if line == "\\end\\":
                    break
                if line.startswith("ngram "):
                    k, _, n = line[6:].partition("=")
                    declared[int(k)] = int(n)
                    continue
                if line.startswith("\\") and line.endswith("-grams:"):
                    section = int(line[1:line.index("-")])
                    continue
                if section is None:
                    raise DataError(f"{path}:{lineno}: unexpected line {line!r}")
                fields = line.split()
                if len(fields) not in (section + 1, section + 2):
                    raise DataError(f"{path}:{lineno}: malformed {section}-gram entry")
                g = tuple(fields[1:1 + section])
                logprobs[g] = float(fields[0])
                if len(fields) == section + 2:
                    backoffs[g] = float(fields[-1])
        if not declared:
            raise DataError(f"{path}: no \\data\\ header")
        order = max(declared)
        for k, n in declared.items():
            got = sum(1 for g in logprobs if len(g) == k)
            if got != n:
                raise DataError(f"{path}: header declares {n} {k}-grams, found {got}")
        return cls(order, logprobs, backoffs, smoothing)


# --------------------------------------------------------------------------
# training
# --------------------------------------------------------------------------

def _count(corpus: Iterable, order: int) -> list[Counter]:
    counts = [Counter() for _ in range(order + 1)]
    for s in corpus:
        padded = (BOS,) + _as_tokens(s) + (EOS,)
        for k in range(1, order + 1):
            c = counts[k]
            for i in range(len(padded) - k + 1):
                c[padded[i:i + k]] += 1
    return counts


def _continuation_counts(counts: list[Counter], order: int) -> list[dict]:
    """Kneser-Ney adjusted counts: raw at the top order and for <s>-initial n-grams,
    number of distinct left extensions otherwise."""
    adjusted: list[dict] = [{} for _ in range(order + 1)]
    adjusted[order] = dict(counts[order])
    for k in range(order - 1, 0, -1):
        left = Counter(g[1:] for g in counts[k + 1])
        adj = {}
        for g, c in counts[k].items():
            adj[g] = c if g[0] == BOS else left.get(g, 0)
        adjusted[k] = adj
    return adjusted


def train_lm(corpus: Sequence, order: int = 5, smoothing: str = "kneser_ney",
             discount: float = 0.75) -> NgramLanguageModel:
    """Estimate an interpolated back-off model.

    Kneser-Ney uses the fixed ``discount``; it falls back to Witten-Bell when
    some order has fewer than two distinct n-grams. ``<unk>`` enters the
    unigram table with a count of one.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if smoothing not in SMOOTHING:
        raise ValueError(f"unknown smoothing {smoothing!r}")
    corpus = list(corpus)
    if not corpus:
        raise ValueError("cannot train a language model on an empty corpus")
    counts = _count(corpus, order)
    if smoothing == "kneser_ney" and any(len(counts[k]) < 2 for k in range(1, order + 1)):
        log.info("too few distinct n-grams for Kneser-Ney; using Witten-Bell")
        smoothing = "witten_bell"

    use_kn = smoothing == "kneser_ney"
    table = _continuation_counts(counts, order) if use_kn else [dict(c) for c in counts]

    unigrams = {g: c for g, c in table[1].items() if g != (BOS,)}
    unigrams.setdefault((UNK,), 1)
    table[1] = unigrams
    vocab_size = len(unigrams)

    logprobs: dict[tuple[str, ...], float] = {}
    backoffs: dict[tuple[str, ...], float] = {}
    probs: dict[tuple[str, ...], float] = {}

    def lower(word: str, ctx: tuple[str, ...]) -> float:
        # interpolated lower-order probability, via the same back-off walk as querying
        weight = 1.0
        for start in range(len(ctx) + 1):
            h = ctx[start:]
            p = probs.get(h + (word,))
            if p is not None:
                return weight * p
            weight *= gammas.get(h, 1.0)
        return weight / vocab_size

    gammas: dict[tuple[str, ...], float] = {}
    for k in range(1, order + 1):
        groups: dict[tuple[str, ...], list] = defaultdict(list)
        for g, c in table[k].items():
            if c > 0:
                groups[g[:-1]].append((g[-1], c))
        new_probs = {}
        new_gammas = {}
        for h, items in groups.items():
            total = sum(c for _, c in items)
            types = len(items)
            if use_kn:
                gamma = discount * types / total
                for w, c in items:
                    new_probs[h + (w,)] = max(c - discount, 0.0) / total + gamma * lower(w, h[1:])
            else:
                gamma = types / (total + types)
                for w, c in items:
                    new_probs[h + (w,)] = c / (total + types) + gamma * lower(w, h[1:])
            new_gammas[h] = gamma
        probs.update(new_probs)
        gammas.update(new_gammas)

    for g, p in probs.items():
        logprobs[g] = math.log10(p)
    logprobs[(BOS,)] = NO_PROB
    for h, gamma in gammas.items():
        if h:
            backoffs[h] = math.log10(gamma)
    return NgramLanguageModel(order, logprobs, backoffs, smoothing)


# --------------------------------------------------------------------------
# scoring
# --------------------------------------------------------------------------

def cross_entropy(model: NgramLanguageModel, s) -> float:
    """Bits per token, counting the end-of-sentence marker."""
    tokens = _as_tokens(s)
    if not tokens:
        raise ValueError("cross-entropy of an empty sentence is undefined")
    lp = model.token_log10_probs(tokens)
    return -sum(lp) / math.log10(2) / len(lp)


def perplexity(model: NgramLanguageModel, corpus: Iterable) -> float:
    total, n = 0.0, 0
    for s in corpus:
        lp = model.token_log10_probs(_as_tokens(s))
        total += sum(lp)
        n += len(lp)
    return 10 ** (-total / n)


@dataclass(frozen=True)
class SelectedSentence:
    index: int
    sentence: object
    score: float


def moore_lewis_scores(in_lm: NgramLanguageModel, out_lm: NgramLanguageModel,
                       pool: Sequence) -> np.ndarray:
    return np.array([cross_entropy(in_lm, s) - cross_entropy(out_lm, s) for s in pool])


def moore_lewis_select(in_lm: NgramLanguageModel, out_lm: NgramLanguageModel, pool: Sequence,
                       top_k: int | None = None, threshold: float | None = None
                       ) -> list[SelectedSentence]:
    """Cross-entropy-difference selection.

    Sentences are ranked by ``H_in - H_out`` ascending with ties broken by
    pool position; the top ``top_k`` (or all scoring ``<= threshold``) are
    returned in pool order.
    """
    if (top_k is None) == (threshold is None):
        raise ValueError("give exactly one of top_k or threshold")
    scores = moore_lewis_scores(in_lm, out_lm, pool)
    ranking = sorted(range(len(pool)), key=lambda i: scores[i])
    if top_k is not None:
        if top_k < 0:
            raise ValueError("top_k must be >= 0")
        chosen = ranking[:top_k]
    else:
        chosen = [i for i in ranking if scores[i] <= threshold]
    return [SelectedSentence(i, pool[i], float(scores[i])) for i in sorted(chosen)]


_LOGIT_HIGH = math.log(7.0)        # 4 * sigmoid(z) = 3.5
_LOGIT_LOW = -math.log(3.0)        # 4 * sigmoid(z) = 1.0


@dataclass(frozen=True)
class FluencyCalibration:
    low_entropy: float   # 10th percentile, mapped to 3.5
    high_entropy: float  # 90th percentile, mapped to 1.0

    @property
    def slope(self) -> float:
        return (_LOGIT_HIGH - _LOGIT_LOW) / (self.high_entropy - self.low_entropy)

    @property
    def intercept(self) -> float:
        return _LOGIT_HIGH + self.slope * self.low_entropy


def calibrate_fluency(model: NgramLanguageModel, corpus: Sequence) -> FluencyCalibration:
    ents = np.array([cross_entropy(model, s) for s in corpus if _as_tokens(s)])
    if len(ents) < 2:
        raise ValueError("calibration needs at least two non-empty sentences")
    lo, hi = np.percentile(ents, [10, 90])
    if not hi > lo:
        raise ValueError("calibration corpus has no entropy spread")
    return FluencyCalibration(float(lo), float(hi))


def fluency_from_entropy(entropy: float, calibration: FluencyCalibration) -> float:
    return 4.0 * float(expit(calibration.intercept - calibration.slope * entropy))


def fluency_proxy(model: NgramLanguageModel, s, calibration: FluencyCalibration | None) -> float:
    """LM fluency proxy on the 0..4 scale (strictly decreasing in cross-entropy)."""
    if calibration is None:
        raise ValueError("fluency proxy needs a calibration; see calibrate_fluency")
    return fluency_from_entropy(cross_entropy(model, s), calibration)
