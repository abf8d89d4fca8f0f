"""Automatic evaluation metrics, human-judgment aggregation and correlation analysis."""

from __future__ import annotations

import enum
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy import stats as _stats

from . import _kernels
from ._io import DataError, atomic_write, read_lines
from .textcore import TokenizedSentence, is_punct_token, ngrams, tokenize

TER_MAX_BLOCK = 10
TER_MAX_SHIFT_DISTANCE = 50


def _toks(s) -> tuple[str, ...]:
    if isinstance(s, TokenizedSentence):
        return s.tokens
    if isinstance(s, str):
        return tokenize(s).tokens
    return tuple(s)


# --------------------------------------------------------------------------
# BLEU
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BleuStats:
    matches: tuple[int, ...]
    totals: tuple[int, ...]
    cand_len: int
    ref_len: int

    def __add__(self, other: "BleuStats") -> "BleuStats":
        return BleuStats(
            tuple(a + b for a, b in zip(self.matches, other.matches)),
            tuple(a + b for a, b in zip(self.totals, other.totals)),
            self.cand_len + other.cand_len,
            self.ref_len + other.ref_len,
        )


def _closest_ref_len(cand_len: int, ref_lens: Sequence[int]) -> int:
    return min(ref_lens, key=lambda r: (abs(r - cand_len), r))


def bleu_stats(candidate, references: Sequence, max_n: int = 4) -> BleuStats:
    cand = _toks(candidate)
    refs = [_toks(r) for r in references]
    if not refs:
        raise ValueError("each candidate needs at least one reference")
    matches, totals = [], []
    for n in range(1, max_n + 1):
        cand_counts = ngrams(cand, n).entries
        max_ref: Counter = Counter()
        for r in refs:
            for g, c in ngrams(r, n).entries.items():
                if c > max_ref[g]:
                    max_ref[g] = c
        matches.append(sum(min(c, max_ref[g]) for g, c in cand_counts.items()))
        totals.append(max(0, len(cand) - n + 1))
    return BleuStats(tuple(matches), tuple(totals), len(cand),
                     _closest_ref_len(len(cand), [len(r) for r in refs]))


def _bleu_from_stats(st: BleuStats, smooth: bool = False) -> float:
    if st.cand_len == 0:
        return 0.0
    log_p = []
    for n, (m, t) in enumerate(zip(st.matches, st.totals), start=1):
        if t == 0:
            continue  # order longer than every candidate: excluded from the mean
        if smooth and n > 1:
            m, t = m + 1, t + 1
        if m == 0:
            return 0.0
        log_p.append(math.log(m / t))
    bp = 1.0 if st.cand_len > st.ref_len else math.exp(1.0 - st.ref_len / st.cand_len)
    return 100.0 * bp * math.exp(sum(log_p) / len(log_p))


def bleu(candidates: Sequence, references: Sequence[Sequence], max_n: int = 4) -> float:
    """Corpus BLEU in [0, 100] with multi-reference clipping and closest-length brevity penalty."""
    if len(candidates) != len(references):
        raise ValueError(f"{len(candidates)} candidates but {len(references)} reference lists")
    if not candidates:
        raise ValueError("BLEU of an empty corpus is undefined")
    total = None
    for cand, refs in zip(candidates, references):
        st = bleu_stats(cand, refs, max_n)
        total = st if total is None else total + st
    return _bleu_from_stats(total)


def sentence_bleu(candidate, references: Sequence, max_n: int = 4) -> float:
    """Sentence BLEU with add-one smoothing on orders above one."""
    return _bleu_from_stats(bleu_stats(candidate, references, max_n), smooth=True)


# --------------------------------------------------------------------------
# PINC, TER, lexical meaning proxy
# --------------------------------------------------------------------------

def pinc(source, candidate, max_n: int = 4) -> float:
    """Percentage of candidate n-gram types absent from the source, averaged over orders."""
    src, cand = _toks(source), _toks(candidate)
    if not cand:
        raise ValueError("PINC of an empty candidate is undefined")
    parts = []
    for n in range(1, max_n + 1):
        cand_set = set(ngrams(cand, n).entries)
        if not cand_set:
            continue
        src_set = set(ngrams(src, n).entries)
        parts.append(1.0 - len(cand_set & src_set) / len(cand_set))
    return 100.0 * sum(parts) / len(parts)


def ter_edits(candidate, reference) -> tuple[int, int]:
    """``(word_edits, shifts)`` turning ``candidate`` into ``reference``.

    Shifts are chosen greedily: every block of up to ``TER_MAX_BLOCK`` words
    is tried at every destination within
    ``TER_MAX_SHIFT_DISTANCE`` positions; the shift with the largest drop in
    edit distance is applied (first in (start, length, destination) order on
    ties) as long as that drop exceeds the cost of the shift itself.
    """
    cand, ref = _toks(candidate), _toks(reference)
    vocab: dict[str, int] = {}
    hyp = np.array([vocab.setdefault(t, len(vocab)) for t in cand], dtype=np.int64)
    r = np.array([vocab.setdefault(t, len(vocab)) for t in ref], dtype=np.int64)
    return _kernels.ter_greedy(hyp, r, TER_MAX_BLOCK, TER_MAX_SHIFT_DISTANCE)


def ter(candidate, references: Sequence) -> float:
    """Minimum over references of (edits + shifts) / reference length."""
    if not references:
        raise ValueError("TER needs at least one reference")
    best = math.inf
    for ref in references:
        ref_toks = _toks(ref)
        if not ref_toks:
            raise ValueError("TER reference must be non-empty")
        ed, shifts = ter_edits(candidate, ref_toks)
        best = min(best, (ed + shifts) / len(ref_toks))
    return best


def meaning_proxy(source, candidate) -> float:
    """Content-unigram F1 between source and candidate, mapped onto the 1..6 scale."""
    src = Counter(t.lower() for t in _toks(source) if not is_punct_token(t))
    cand = Counter(t.lower() for t in _toks(candidate) if not is_punct_token(t))
    if not src and not cand:
        return 6.0
    overlap = sum((src & cand).values())
    if overlap == 0:
        return 1.0
    p = overlap / sum(cand.values())
    r = overlap / sum(src.values())
    return 1.0 + 5.0 * (2 * p * r / (p + r))


# --------------------------------------------------------------------------
# combined score
# --------------------------------------------------------------------------

HUMAN_RANGES = {"formality": (-3.0, 3.0), "fluency": (1.0, 5.0), "meaning": (1.0, 6.0)}
PROXY_RANGES = {"formality": (-3.0, 3.0), "fluency": (0.0, 4.0), "meaning": (1.0, 6.0)}


def combined_score(formality: float, fluency: float, meaning: float,
                   ranges: Mapping[str, tuple[float, float]] = HUMAN_RANGES) -> float:
    """Sum of min-max normalised axes, in [0, 3]."""
    total = 0.0
    for axis, value in (("formality", formality), ("fluency", fluency), ("meaning", meaning)):
        lo, hi = ranges[axis]
        if not lo <= value <= hi:
            raise ValueError(f"{axis} value {value} outside [{lo}, {hi}]")
        total += (value - lo) / (hi - lo)
    return total


# --------------------------------------------------------------------------
# human judgments
# --------------------------------------------------------------------------

class Criterion(str, enum.Enum):
    FORMALITY = "formality"
    FLUENCY = "fluency"
    MEANING = "meaning"
    OVERALL_RANK = "overall_rank"


CRITERION_RANGES = {
    Criterion.FORMALITY: (-3.0, 3.0),
    Criterion.FLUENCY: (1.0, 5.0),
    Criterion.MEANING: (1.0, 6.0),
}


@dataclass(frozen=True)
class JudgmentRecord:
    sentence_id: str
    system_id: str
    judge_id: str
    criterion: Criterion
    value: float

    def __post_init__(self):
        object.__setattr__(self, "criterion", Criterion(self.criterion))
        if self.criterion is Criterion.OVERALL_RANK:
            if self.value < 1 or self.value != int(self.value):
                raise ValueError(f"overall rank must be a positive integer, got {self.value}")
        else:
            lo, hi = CRITERION_RANGES[self.criterion]
            if not lo <= self.value <= hi:
                raise ValueError(f"{self.criterion.value} value {self.value} outside [{lo}, {hi}]")


def read_judgments(path) -> list[JudgmentRecord]:
    out = []
    for lineno, line in enumerate(read_lines(path), start=1):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != 5:
            raise DataError(f"{path}:{lineno}: expected 5 tab-separated columns")
        try:
            out.append(JudgmentRecord(cols[0], cols[1], cols[2], cols[3], float(cols[4])))
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from None
    return out


def write_judgments(path, records: Sequence[JudgmentRecord]) -> None:
    with atomic_write(path) as fh:
        for r in records:
            fh.write(f"{r.sentence_id}\t{r.system_id}\t{r.judge_id}\t{r.criterion.value}\t{r.value:g}\n")


def average_ranks(values: Sequence[float]) -> np.ndarray:
    """1-based ranks with ties sharing their mean rank."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="mergesort")
    ranks = np.empty(len(v))
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and v[order[j + 1]] == v[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _rank_groups(judgments: Sequence[JudgmentRecord]) -> dict[tuple[str, str], dict[str, float]]:
    groups: dict[tuple[str, str], dict[str, float]] = defaultdict(dict)
    for r in judgments:
        if r.criterion is Criterion.OVERALL_RANK:
            groups[(r.sentence_id, r.judge_id)][r.system_id] = r.value
    if not groups:
        raise ValueError("no overall_rank judgments")
    systems = None
    out = {}
    for key, ranking in groups.items():
        if systems is None:
            systems = set(ranking)
        elif set(ranking) != systems:
            raise ValueError(
                f"sentence {key[0]!r}, judge {key[1]!r} ranks {sorted(ranking)}; expected {sorted(systems)}")
        names = sorted(ranking)
        out[key] = dict(zip(names, average_ranks([ranking[s] for s in names])))
    return out


def overall_rank(judgments: Sequence[JudgmentRecord]) -> dict[str, float]:
    """Mean over sentences of the mean over judges of each system's rank."""
    groups = _rank_groups(judgments)
    per_sentence: dict[str, list[dict[str, float]]] = defaultdict(list)
    for (sid, _), ranks in groups.items():
        per_sentence[sid].append(ranks)
    systems = sorted(next(iter(groups.values())))
    result = {}
    for system in systems:
        sent_means = [np.mean([r[system] for r in judges]) for judges in per_sentence.values()]
        result[system] = float(np.mean(sent_means))
    return result


def human_scores(judgments: Sequence[JudgmentRecord]) -> dict[str, dict[tuple[str, str], float]]:
    """Per criterion, the judge-averaged value for each (sentence, system).

    Overall rankings are tie-averaged within each judge before averaging.
    """
    out: dict[str, dict[tuple[str, str], list]] = defaultdict(lambda: defaultdict(list))
    for r in judgments:
        if r.criterion is not Criterion.OVERALL_RANK:
            out[r.criterion.value][(r.sentence_id, r.system_id)].append(r.value)
    if any(r.criterion is Criterion.OVERALL_RANK for r in judgments):
        for (sid, _), ranks in _rank_groups(judgments).items():
            for system, rank in ranks.items():
                out["overall_rank"][(sid, system)].append(rank)
    return {c: {k: float(np.mean(v)) for k, v in d.items()} for c, d in out.items()}


# --------------------------------------------------------------------------
# correlation and significance
# --------------------------------------------------------------------------

def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Spearman's rho as the Pearson correlation of tie-averaged ranks."""
    if len(xs) != len(ys):
        raise ValueError("inputs differ in length")
    if len(xs) < 2:
        raise ValueError("need at least two points")
    rx, ry = average_ranks(xs), average_ranks(ys)
    dx, dy = rx - rx.mean(), ry - ry.mean()
    denom = math.sqrt(float(dx @ dx) * float(dy @ dy))
    if denom == 0.0:
        raise ValueError("Spearman correlation is undefined for constant input")
    return float(np.clip(dx @ dy / denom, -1.0, 1.0))


def spearman_p_value(rho: float, n: int) -> float:
    """Two-sided p-value from the t approximation."""
    if n < 3:
        return 1.0
    if abs(rho) >= 1.0:
        return 0.0
    t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    return float(2.0 * _stats.t.sf(abs(t), n - 2))


_BOOTSTRAP_CHUNK = 1000


def paired_bootstrap(scores_a: Sequence[float], scores_b: Sequence[float],
                     resamples: int = 10000, seed: int = 0) -> float:
    """Two-sided paired bootstrap p-value for a difference in means.

    The bootstrap distribution of the mean difference is centred on the
    observed difference; the p-value is the smoothed fraction of resamples
    deviating from it at least as much as the observed difference deviates
    from zero. Resample indices come in chunks, each from a generator keyed
    by ``(seed, chunk)``.
    """
    a = np.asarray(scores_a, dtype=float)
    b = np.asarray(scores_b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("paired scores must have equal length")
    if len(a) < 2:
        raise ValueError("need at least two paired scores")
    d = a - b
    n = len(d)
    observed = float(d.mean())
    extreme = 0
    for chunk, start in enumerate(range(0, resamples, _BOOTSTRAP_CHUNK)):
        size = min(_BOOTSTRAP_CHUNK, resamples - start)
        rng = np.random.default_rng([seed, chunk])
        idx = rng.integers(0, n, size=(size, n))
        means = _kernels.bootstrap_means(d, idx)
        extreme += int(np.sum(np.abs(means - observed) >= abs(observed)))
    return (extreme + 1) / (resamples + 1)


CORRELATION_PAIRS = (
    ("formality", "formality"),
    ("fluency", "fluency"),
    ("meaning", "meaning"),
    ("bleu", "overall_rank"),
    ("ter", "overall_rank"),
    ("pinc", "overall_rank"),
)


def correlate_report(auto_scores: Mapping[tuple[str, str], Mapping[str, float]],
                     judgments: Sequence[JudgmentRecord],
                     alpha: float = 0.001) -> dict:
    """Spearman correlation of each automatic metric with its human criterion.

    ``auto_scores`` maps ``(sentence_id, system_id)`` to metric values.
    Returns a document with one row per (metric, criterion) pair that has at
    least two aligned points.
    """
    human = human_scores(judgments)
    overlap_any = False
    rows = []
    for metric, criterion in CORRELATION_PAIRS:
        h = human.get(criterion, {})
        keys = sorted(k for k in h if k in auto_scores and metric in auto_scores[k])
        if keys:
            overlap_any = True
        if len(keys) < 2:
            continue
        xs = [auto_scores[k][metric] for k in keys]
        ys = [h[k] for k in keys]
        try:
            rho = spearman(xs, ys)
        except ValueError:
            rho = float("nan")
        p = spearman_p_value(rho, len(keys)) if not math.isnan(rho) else 1.0
        rows.append({"automatic": metric, "human": criterion, "n": len(keys),
                     "rho": rho, "p_value": p, "significant": bool(p < alpha)})
    if not overlap_any:
        raise DataError("automatic scores and judgments share no (sentence, system) ids")
    return {"alpha": alpha, "rows": rows}


_METRIC_LABELS = {"formality": "Formality", "fluency": "Fluency (LM proxy)",
                  "meaning": "Meaning (lexical proxy)", "bleu": "BLEU", "ter": "TER", "pinc": "PINC"}


def render_correlation(doc: dict) -> str:
    lines = [f"{'Automatic':<24} {'Human':<13} {'rho':>7} {'n':>6}", "-" * 53]
    for row in doc["rows"]:
        star = "*" if row["significant"] else ""
        lines.append(f"{_METRIC_LABELS[row['automatic']]:<24} {row['human']:<13} "
                     f"{row['rho']:>7.2f}{star:<1} {row['n']:>5}")
    lines.append(f"* p < {doc['alpha']:g}")
    return "\n".join(lines) + "\n"


def read_auto_scores(path) -> dict[tuple[str, str], dict[str, float]]:
    """Read ``sentence_id<TAB>system_id<TAB>metric<TAB>value`` lines."""
    out: dict[tuple[str, str], dict[str, float]] = defaultdict(dict)
    for lineno, line in enumerate(read_lines(path), start=1):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != 4:
            raise DataError(f"{path}:{lineno}: expected 4 tab-separated columns")
        try:
            out[(cols[0], cols[1])][cols[2]] = float(cols[3])
        except ValueError:
            raise DataError(f"{path}:{lineno}: bad value {cols[3]!r}") from None
    return dict(out)
