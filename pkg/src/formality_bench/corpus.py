"""Corpus I/O, creation filters, formality partitioning and training-set assembly."""

from __future__ import annotations

import enum
import json
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ._io import DataError, atomic_write, read_lines
from .textcore import TokenizedSentence, char_edit_distances, is_punct_token, tokenize


class Direction(str, enum.Enum):
    INFORMAL_TO_FORMAL = "informal_to_formal"
    FORMAL_TO_INFORMAL = "formal_to_informal"


@dataclass(frozen=True)
class ParallelExample:
    id: str
    source: TokenizedSentence
    references: tuple[TokenizedSentence, ...]
    direction: Direction = Direction.INFORMAL_TO_FORMAL

    def __post_init__(self):
        object.__setattr__(self, "references", tuple(self.references))
        if not 1 <= len(self.references) <= 4:
            raise ValueError(
                f"example {self.id!r}: expected 1..4 references, got {len(self.references)}")


@dataclass
class CorpusSplit:
    name: str
    examples: list[ParallelExample] = field(default_factory=list)

    def __post_init__(self):
        if self.name not in ("train", "tune", "test"):
            raise ValueError(f"unknown split name {self.name!r}")

    def __len__(self) -> int:
        return len(self.examples)

    def validate(self, strict_references: bool = True) -> None:
        """Check id uniqueness and, for tune/test, the four-reference rule."""
        seen: set[str] = set()
        for ex in self.examples:
            if ex.id in seen:
                raise DataError(f"duplicate example id {ex.id!r} in {self.name}")
            seen.add(ex.id)
            if strict_references and self.name != "train" and len(ex.references) != 4:
                raise DataError(
                    f"{self.name} example {ex.id!r} has {len(ex.references)} references, need 4")


# --------------------------------------------------------------------------
# filtering
# --------------------------------------------------------------------------

class RejectReason(str, enum.Enum):
    QUESTION = "question"
    URL = "url"
    TOO_SHORT = "too_short"
    TOO_LONG = "too_long"


@dataclass(frozen=True)
class FilterConfig:
    min_tokens: int = 5
    max_tokens: int = 25
    reject_questions: bool = True
    reject_urls: bool = True

    def __post_init__(self):
        if not 1 <= self.min_tokens <= self.max_tokens:
            raise ValueError("need 1 <= min_tokens <= max_tokens")


DOMAIN_SUFFIXES = (".com", ".org", ".net", ".edu", ".gov", ".io", ".co", ".uk",
                   ".us", ".ca", ".de", ".info", ".biz", ".ly", ".tv", ".me")
_DOMAIN_RE = re.compile(r"[a-z0-9-]\.(?:%s)$" % "|".join(s[1:] for s in DOMAIN_SUFFIXES))


def _looks_like_url(tok: str) -> bool:
    low = tok.lower()
    return "http" in low or "www." in low or bool(_DOMAIN_RE.search(low))


def filter_sentence(s: TokenizedSentence, cfg: FilterConfig = FilterConfig()) -> RejectReason | None:
    """Return ``None`` to keep ``s`` or the first matching reject reason.

    Reasons are checked in the order question, url, too_short, too_long.
    Length bounds are inclusive.
    """
    toks = s.tokens
    if cfg.reject_questions and any(is_punct_token(t) and "?" in t for t in toks):
        return RejectReason.QUESTION
    if cfg.reject_urls and any(_looks_like_url(t) for t in toks):
        return RejectReason.URL
    if len(toks) < cfg.min_tokens:
        return RejectReason.TOO_SHORT
    if len(toks) > cfg.max_tokens:
        return RejectReason.TOO_LONG
    return None


def filter_corpus(sentences: Iterable[TokenizedSentence], cfg: FilterConfig = FilterConfig()):
    """Split sentences into ``(kept, [(sentence, reason), ...])``."""
    kept, rejected = [], []
    for s in sentences:
        reason = filter_sentence(s, cfg)
        if reason is None:
            kept.append(s)
        else:
            rejected.append((s, reason))
    return kept, rejected


def partition_by_formality(sentences: Sequence[TokenizedSentence], model, threshold: float = 0.0):
    """Split into (informal, formal) by model score; ties at the threshold are dropped."""
    from .formality import predict_formality_batch

    scores = predict_formality_batch(model, sentences)
    informal = [s for s, v in zip(sentences, scores) if v < threshold]
    formal = [s for s, v in zip(sentences, scores) if v > threshold]
    return informal, formal


# --------------------------------------------------------------------------
# sub-selection and assembly
# --------------------------------------------------------------------------

def _raw(x) -> str:
    return x.raw if isinstance(x, TokenizedSentence) else str(x)


def subselect_by_edit_distance(pairs: Sequence, min_chars: int = 10) -> list:
    """Keep pairs whose character edit distance is strictly greater than ``min_chars``.

    ``pairs`` may hold ``(source, rewrite)`` tuples of strings or sentences,
    or any object exposing ``source``/``target`` attributes.
    """
    def sides(p):
        if hasattr(p, "source") and hasattr(p, "target"):
            return _raw(p.source), _raw(p.target)
        return _raw(p[0]), _raw(p[1])

    dists = char_edit_distances(sides(p) for p in pairs)
    return [p for p, d in zip(pairs, dists) if d > min_chars]


def upweight_duplicate(examples: Sequence, k: int) -> list:
    if k < 1:
        raise ValueError(f"duplication factor must be >= 1, got {k}")
    return list(examples) * k


def assemble_training_set(base: Sequence, dup_factor: int, *extra_sets: Sequence) -> list:
    out = upweight_duplicate(base, dup_factor)
    for extra in extra_sets:
        out.extend(extra)
    return out


# --------------------------------------------------------------------------
# statistics
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CorpusStats:
    n_pairs: int
    edit_distance_mean: float
    edit_distance_std: float
    source_formality_mean: float | None
    reference_formality_mean: float | None
    source_length_mean: float
    reference_length_mean: float

    def to_text(self) -> str:
        lines = []
        for key, value in asdict(self).items():
            if isinstance(value, float):
                value = f"{value:.4f}"
            lines.append(f"{key}: {value}")
        return "\n".join(lines) + "\n"


def corpus_stats(split: CorpusSplit, model=None) -> CorpusStats:
    """Edit-distance, formality and length statistics over (source, first reference)."""
    if not split.examples:
        raise ValueError("cannot compute statistics of an empty split")
    sources = [ex.source for ex in split.examples]
    refs = [ex.references[0] for ex in split.examples]
    dists = char_edit_distances((s.raw, r.raw) for s, r in zip(sources, refs)).astype(float)
    src_f = ref_f = None
    if model is not None:
        from .formality import predict_formality_batch
        src_f = float(np.mean(predict_formality_batch(model, sources)))
        ref_f = float(np.mean(predict_formality_batch(model, refs)))
    return CorpusStats(
        n_pairs=len(sources),
        edit_distance_mean=float(dists.mean()),
        edit_distance_std=float(dists.std()),
        source_formality_mean=src_f,
        reference_formality_mean=ref_f,
        source_length_mean=float(np.mean([len(s) for s in sources])),
        reference_length_mean=float(np.mean([len(r) for r in refs])),
    )


def write_stats(stats: CorpusStats, json_path=None, text_path=None) -> None:
    if json_path is not None:
        with atomic_write(json_path) as fh:
            json.dump(asdict(stats), fh, indent=2, sort_keys=True)
            fh.write("\n")
    if text_path is not None:
        with atomic_write(text_path) as fh:
            fh.write(stats.to_text())


# --------------------------------------------------------------------------
# file formats
# --------------------------------------------------------------------------

def read_monolingual(path) -> list[TokenizedSentence]:
    return [tokenize(line) for line in read_lines(path)]


def write_monolingual(path, sentences: Iterable) -> None:
    with atomic_write(path) as fh:
        for s in sentences:
            fh.write(_raw(s) + "\n")


def read_parallel(path, name: str = "test",
                  direction: Direction = Direction.INFORMAL_TO_FORMAL) -> CorpusSplit:
    """Read ``id<TAB>source<TAB>ref1[<TAB>ref2..ref4]`` lines (no header)."""
    examples = []
    for lineno, line in enumerate(read_lines(path), start=1):
        if not line.strip():
            continue
        cols = line.split("\t")
        if not 3 <= len(cols) <= 6:
            raise DataError(f"{path}:{lineno}: expected 3..6 tab-separated columns, got {len(cols)}")
        examples.append(ParallelExample(
            cols[0], tokenize(cols[1]), tuple(tokenize(c) for c in cols[2:]), direction))
    split = CorpusSplit(name, examples)
    split.validate(strict_references=False)
    return split


def write_parallel(path, split: CorpusSplit) -> None:
    with atomic_write(path) as fh:
        for ex in split.examples:
            cols = [ex.id, ex.source.raw] + [r.raw for r in ex.references]
            fh.write("\t".join(cols) + "\n")


@dataclass(frozen=True)
class PseudoPair:
    """A synthetic training pair with its provenance tag."""

    id: str
    source: TokenizedSentence
    target: TokenizedSentence
    provenance: str


def read_pairs(path) -> list[PseudoPair]:
    """Read ``id<TAB>source<TAB>target<TAB>provenance`` lines."""
    out = []
    for lineno, line in enumerate(read_lines(path), start=1):
        if not line:
            continue
        cols = line.split("\t")
        if len(cols) != 4:
            raise DataError(f"{path}:{lineno}: expected 4 tab-separated columns, got {len(cols)}")
        out.append(PseudoPair(cols[0], tokenize(cols[1]), tokenize(cols[2]), cols[3]))
    return out


def write_pairs(path, pairs: Iterable[PseudoPair]) -> None:
    with atomic_write(path) as fh:
        for p in pairs:
            fh.write(f"{p.id}\t{p.source.raw}\t{p.target.raw}\t{p.provenance}\n")


def load_gyafc_directory(split_dir, name: str) -> CorpusSplit:
    """Load a GYAFC-layout split directory (``informal`` + ``formal`` or ``formal.ref0..3``).

    Train directories carry one ``formal`` file; tune/test directories carry
    ``formal.ref0`` .. ``formal.ref3``.
    """
    split_dir = Path(split_dir)
    sources = read_lines(split_dir / "informal")
    ref_files = sorted(split_dir.glob("formal.ref*")) or [split_dir / "formal"]
    ref_cols = [read_lines(p) for p in ref_files]
    for p, col in zip(ref_files, ref_cols):
        if len(col) != len(sources):
            raise DataError(f"{p}: {len(col)} lines, expected {len(sources)}")
    examples = [
        ParallelExample(f"{name}-{i}", tokenize(src), tuple(tokenize(c[i]) for c in ref_cols))
        for i, src in enumerate(sources)
    ]
    return CorpusSplit(name, examples)
