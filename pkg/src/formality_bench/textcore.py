"""Tokenization, n-grams and edit distances shared by every other module."""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels

# '*' stays inside words so censored tokens such as "s***" survive re-tokenization
_NOT_PUNCT = frozenset("*")


def is_punct_char(ch: str) -> bool:
    return ch not in _NOT_PUNCT and unicodedata.category(ch).startswith("P")


def is_punct_token(tok: str) -> bool:
    return bool(tok) and all(is_punct_char(c) for c in tok)


@dataclass(frozen=True)
class TokenizedSentence:
    """Raw text with its token sequence.

    ``space_before[i]`` records whether token ``i`` was preceded by
    whitespace in ``raw``; rewriting rules use it to rebuild surface text
    without inventing or losing spaces.
    """

    raw: str
    tokens: tuple[str, ...]
    space_before: tuple[bool, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if len(self.space_before) != len(self.tokens):
            flags = tuple(i > 0 for i in range(len(self.tokens)))
            object.__setattr__(self, "space_before", flags)

    @property
    def n_chars(self) -> int:
        return len(self.raw)

    def __len__(self) -> int:
        return len(self.tokens)

    @classmethod
    def from_tokens(cls, tokens: Sequence[str],
                    space_before: Sequence[bool] | None = None) -> "TokenizedSentence":
        tokens = tuple(tokens)
        if space_before is None:
            space_before = tuple(i > 0 for i in range(len(tokens)))
        space_before = tuple(bool(s) for s in space_before)
        parts = []
        for i, (tok, sp) in enumerate(zip(tokens, space_before)):
            if i and sp:
                parts.append(" ")
            parts.append(tok)
        return cls("".join(parts), tokens, space_before)


def _split_word(word: str) -> list[str]:
    start, end = 0, len(word)
    while start < end and is_punct_char(word[start]):
        start += 1
    if start == end:
        return [word]
    while end > start and is_punct_char(word[end - 1]):
        end -= 1
    out = []
    if start:
        out.append(word[:start])
    out.append(word[start:end])
    if end < len(word):
        out.append(word[end:])
    return out


def tokenize(raw: str) -> TokenizedSentence:
    """Split on whitespace, then peel leading/trailing punctuation runs.

    Interior punctuation stays put, so ``didn't`` and ``R.O.D`` remain one
    token while ``ME????`` becomes ``ME`` + ``????``. Casing is untouched.
    """
    tokens: list[str] = []
    spaces: list[bool] = []
    for word_start, word in _words_with_offsets(raw):
        pieces = _split_word(word)
        preceded = word_start > 0 and raw[word_start - 1].isspace()
        for k, piece in enumerate(pieces):
            tokens.append(piece)
            spaces.append(preceded if k == 0 else False)
    return TokenizedSentence(raw, tuple(tokens), tuple(spaces))


def _words_with_offsets(raw: str):
    i, n = 0, len(raw)
    while i < n:
        while i < n and raw[i].isspace():
            i += 1
        if i >= n:
            break
        j = i
        while j < n and not raw[j].isspace():
            j += 1
        yield i, raw[i:j]
        i = j


def detokenize(tokens: Sequence[str]) -> str:
    return " ".join(tokens)


# --------------------------------------------------------------------------
# edit distances
# --------------------------------------------------------------------------

def _codepoints(s: str) -> np.ndarray:
    return np.frombuffer(s.encode("utf-32-le"), dtype=np.uint32).astype(np.int64)


def _encode_pair(a: Sequence[str], b: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    vocab: dict[str, int] = {}
    ia = np.array([vocab.setdefault(t, len(vocab)) for t in a], dtype=np.int64)
    ib = np.array([vocab.setdefault(t, len(vocab)) for t in b], dtype=np.int64)
    return ia, ib


def char_edit_distance(a: str, b: str) -> int:
    """Unit-cost Levenshtein distance over Unicode code points."""
    if a == b:
        return 0
    return _kernels.levenshtein(_codepoints(a), _codepoints(b))


def char_edit_distances(pairs: Iterable[tuple[str, str]]) -> np.ndarray:
    """Vectorised :func:`char_edit_distance` over many pairs."""
    pairs = list(pairs)
    if not pairs:
        return np.zeros(0, dtype=np.int64)
    enc_a = [_codepoints(a) for a, _ in pairs]
    enc_b = [_codepoints(b) for _, b in pairs]
    off_a = np.zeros(len(pairs) + 1, dtype=np.int64)
    off_b = np.zeros(len(pairs) + 1, dtype=np.int64)
    off_a[1:] = np.cumsum([len(x) for x in enc_a])
    off_b[1:] = np.cumsum([len(x) for x in enc_b])
    flat_a = np.concatenate(enc_a) if off_a[-1] else np.zeros(0, dtype=np.int64)
    flat_b = np.concatenate(enc_b) if off_b[-1] else np.zeros(0, dtype=np.int64)
    return _kernels.levenshtein_batch(flat_a, off_a, flat_b, off_b)


def token_edit_distance(a: Sequence[str], b: Sequence[str]) -> int:
    if list(a) == list(b):
        return 0
    ia, ib = _encode_pair(a, b)
    return _kernels.levenshtein(ia, ib)


# --------------------------------------------------------------------------
# n-grams
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class NgramMultiset:
    order: int
    entries: Counter

    @property
    def total(self) -> int:
        return sum(self.entries.values())

    def __len__(self) -> int:
        return len(self.entries)


def ngrams(tokens: Sequence[str], n: int) -> NgramMultiset:
    if n < 1:
        raise ValueError(f"n-gram order must be >= 1, got {n}")
    tokens = tuple(tokens)
    counts = Counter(tokens[i:i + n] for i in range(len(tokens) - n + 1))
    return NgramMultiset(n, counts)
