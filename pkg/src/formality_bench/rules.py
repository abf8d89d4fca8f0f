"""Rule-based formality transfer in both directions.

The informal -> formal engine applies six rule families in a fixed order:
repetition collapse, slang replacement, contraction expansion, swear
censoring, lowercasing of shouted words, capitalization. The reverse
engine always inverts the case and lexicon rules; word uppercasing and
character repetition are added at configured per-sentence rates.
"""

from __future__ import annotations

import re
import zlib
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from ._io import read_lines
from .textcore import TokenizedSentence, char_edit_distance, is_punct_token

# tagger(tokens) -> one bool per token, True for proper nouns
ProperNounTagger = Callable[[Sequence[str]], Iterable[bool]]

_LETTER_RUN = re.compile(r"([^\W\d_])\1{2,}")
REPEAT_LENGTH = 5


def _load_mapping(lines: Iterable[str], what: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for line in lines:
        if not line.strip() or line.startswith("#"):
            continue
        key, sep, value = line.partition("\t")
        if not sep:
            raise ValueError(f"{what}: expected key<TAB>value, got {line!r}")
        key, value = key.strip().lower(), value.strip()
        if key in out and out[key] != value:
            raise ValueError(f"{what}: conflicting entries for {key!r}")
        out[key] = value
    return out


def _load_words(lines: Iterable[str]) -> frozenset[str]:
    return frozenset(w.strip().lower() for w in lines if w.strip() and not w.startswith("#"))


def _invert(mapping: dict[str, str]) -> dict[tuple[str, ...], str]:
    inverse: dict[tuple[str, ...], str] = {}
    for key, value in mapping.items():
        inverse.setdefault(tuple(value.lower().split()), key)
    return inverse


@dataclass(frozen=True)
class RuleLexicons:
    contractions: dict[str, str]
    slang: dict[str, str]
    swear: frozenset[str] = frozenset()
    proper_nouns: frozenset[str] = frozenset()
    contractions_inverse: dict = field(init=False, repr=False)
    slang_inverse: dict = field(init=False, repr=False)

    def __post_init__(self):
        for name in ("contractions", "slang"):
            mapping = getattr(self, name)
            bad = [k for k in mapping if k != k.lower()]
            if bad:
                raise ValueError(f"{name} keys must be lowercase: {bad[:3]}")
        object.__setattr__(self, "contractions_inverse", _invert(self.contractions))
        object.__setattr__(self, "slang_inverse", _invert(self.slang))

    @classmethod
    def from_dir(cls, path) -> "RuleLexicons":
        """Load ``contractions.tsv``, ``slang.tsv``, ``swear.txt``, ``proper_nouns.txt``.

        Missing files fall back to the bundled defaults.
        """
        path = Path(path)
        default = resources.files("formality_bench") / "data"

        def lines(name):
            p = path / name
            if p.exists():
                return read_lines(p)
            return (default / name).read_text(encoding="utf-8").splitlines()

        return cls(
            contractions=_load_mapping(lines("contractions.tsv"), "contractions"),
            slang=_load_mapping(lines("slang.tsv"), "slang"),
            swear=_load_words(lines("swear.txt")),
            proper_nouns=_load_words(lines("proper_nouns.txt")),
        )

    @classmethod
    def default(cls) -> "RuleLexicons":
        return cls.from_dir(resources.files("formality_bench") / "data")


@dataclass(frozen=True)
class ReverseRuleProbabilities:
    p_uppercase_word: float = 0.08
    p_char_repetition: float = 0.05
    seed: int = 0

    def __post_init__(self):
        for name in ("p_uppercase_word", "p_char_repetition"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")


# --------------------------------------------------------------------------
# token-list helpers
# --------------------------------------------------------------------------

class _Toks:
    """Mutable token list that remembers which tokens had a space before them."""

    def __init__(self, s: TokenizedSentence):
        self.toks = list(s.tokens)
        self.spaces = list(s.space_before)

    def replace(self, i: int, n: int, new: Sequence[str]) -> None:
        lead = self.spaces[i]
        self.toks[i:i + n] = list(new)
        self.spaces[i:i + n] = [lead] + [True] * (len(new) - 1)

    def sentence(self) -> TokenizedSentence:
        return TokenizedSentence.from_tokens(self.toks, self.spaces)


def _letters(tok: str) -> str:
    return "".join(c for c in tok if c.isalpha())


def _is_shouted(tok: str) -> bool:
    letters = _letters(tok)
    return len(letters) >= 2 and letters.isupper()


def _match_case(original: str, replacement: str) -> str:
    if _is_shouted(original):
        return replacement.lower()
    if original[:1].isupper():
        return replacement[:1].upper() + replacement[1:]
    return replacement


def _capitalize_first_letter(tok: str) -> str:
    for k, c in enumerate(tok):
        if c.isalpha():
            return tok[:k] + c.upper() + tok[k + 1:]
    return tok


def _lowercase_first_letter(tok: str) -> str:
    for k, c in enumerate(tok):
        if c.isalpha():
            return tok[:k] + c.lower() + tok[k + 1:]
    return tok


def _first_word_index(toks: Sequence[str]) -> int | None:
    for i, tok in enumerate(toks):
        if any(c.isalpha() for c in tok):
            return i
    return None


# --------------------------------------------------------------------------
# informal -> formal rule families
# --------------------------------------------------------------------------

def collapse_repetitions(s: TokenizedSentence) -> tuple[TokenizedSentence, int]:
    t = _Toks(s)
    changed = 0
    for i, tok in enumerate(t.toks):
        if is_punct_token(tok):
            new = tok[0] if len(tok) > 1 else tok
        else:
            new = _LETTER_RUN.sub(r"\1", tok)
        if new != tok:
            t.toks[i] = new
            changed += 1
    return t.sentence(), changed


def _lexicon_replace(s: TokenizedSentence, mapping: dict[str, str]) -> tuple[TokenizedSentence, int]:
    t = _Toks(s)
    changed = 0
    i = 0
    while i < len(t.toks):
        tok = t.toks[i]
        value = mapping.get(tok.lower())
        if value is None:
            i += 1
            continue
        words = _match_case(tok, value).split()
        t.replace(i, 1, words)
        changed += 1
        i += len(words)
    return t.sentence(), changed


def replace_slang(s: TokenizedSentence, lex: RuleLexicons) -> tuple[TokenizedSentence, int]:
    return _lexicon_replace(s, lex.slang)


def expand_contractions(s: TokenizedSentence, lex: RuleLexicons) -> tuple[TokenizedSentence, int]:
    return _lexicon_replace(s, lex.contractions)


def censor_swears(s: TokenizedSentence, lex: RuleLexicons) -> tuple[TokenizedSentence, int]:
    t = _Toks(s)
    changed = 0
    for i, tok in enumerate(t.toks):
        if tok.lower() in lex.swear and len(tok) > 1:
            t.toks[i] = tok[0] + "*" * (len(tok) - 1)
            changed += 1
    return t.sentence(), changed


def lowercase_shouting(s: TokenizedSentence) -> tuple[TokenizedSentence, int]:
    t = _Toks(s)
    changed = 0
    for i, tok in enumerate(t.toks):
        if _is_shouted(tok):
            t.toks[i] = tok.lower()
            changed += 1
    return t.sentence(), changed


def capitalize(s: TokenizedSentence, lex: RuleLexicons,
               tagger: ProperNounTagger | None = None) -> tuple[TokenizedSentence, int]:
    t = _Toks(s)
    proper = [False] * len(t.toks)
    if tagger is not None:
        proper = [bool(x) for x in tagger(tuple(t.toks))]
    first = _first_word_index(t.toks)
    changed = 0
    for i, tok in enumerate(t.toks):
        low = tok.lower()
        if low == "i":
            new = "I"
        elif low.startswith("i'") and tok[0] == "i":
            new = "I" + tok[1:]
        elif i == first or low in lex.proper_nouns or proper[i]:
            new = _capitalize_first_letter(tok)
        else:
            new = tok
        if _is_shouted(new) and not _is_shouted(tok):
            # capitalising "iUR" must not create a shouted word
            new = _capitalize_first_letter(tok.lower())
        if new != tok:
            t.toks[i] = new
            changed += 1
    return t.sentence(), changed


def formalize(s: TokenizedSentence, lex: RuleLexicons,
              tagger: ProperNounTagger | None = None) -> TokenizedSentence:
    """Rewrite an informal sentence with the informal -> formal rule families."""
    if not s.tokens:
        return s
    s, _ = collapse_repetitions(s)
    s, _ = replace_slang(s, lex)
    s, _ = expand_contractions(s, lex)
    s, _ = censor_swears(s, lex)
    s, _ = lowercase_shouting(s)
    s, _ = capitalize(s, lex, tagger)
    return s


# --------------------------------------------------------------------------
# formal -> informal
# --------------------------------------------------------------------------

def _phrase_replace(t: _Toks, inverse: dict[tuple[str, ...], str]) -> int:
    if not inverse:
        return 0
    longest = max(len(k) for k in inverse)
    changed = 0
    i = 0
    while i < len(t.toks):
        for n in range(min(longest, len(t.toks) - i), 0, -1):
            key = tuple(w.lower() for w in t.toks[i:i + n])
            value = inverse.get(key)
            if value is not None:
                first = t.toks[i]
                new = value[:1].upper() + value[1:] if first[:1].isupper() else value
                t.replace(i, n, [new])
                changed += 1
                break
        i += 1
    return changed


def sentence_rng(seed: int, sentence_id: str) -> np.random.Generator:
    """Generator derived from ``(seed, sentence_id)`` only, never from iteration order."""
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, zlib.crc32(sentence_id.encode("utf-8"))])


def informalize(s: TokenizedSentence, lex: RuleLexicons,
                probs: ReverseRuleProbabilities = ReverseRuleProbabilities(),
                sentence_id: str | None = None) -> TokenizedSentence:
    """Rewrite a formal sentence with the reverse rules.

    Lowercasing, contraction and slang rules always fire. With probability
    ``p_uppercase_word`` one word is uppercased; with probability
    ``p_char_repetition`` a final punctuation mark (or else the last letter
    of one word) is repeated. Randomness comes from
    :func:`sentence_rng` with ``sentence_id`` defaulting to the raw text.
    """
    if not s.tokens:
        return s
    t = _Toks(s)
    first = _first_word_index(t.toks)
    for i, tok in enumerate(t.toks):
        if tok == "I":
            t.toks[i] = "i"
        elif i == first:
            t.toks[i] = _lowercase_first_letter(tok)
    _phrase_replace(t, lex.contractions_inverse)
    _phrase_replace(t, lex.slang_inverse)

    rng = sentence_rng(probs.seed, s.raw if sentence_id is None else sentence_id)
    u_upper, u_rep = rng.random(2)
    if u_upper < probs.p_uppercase_word:
        words = [i for i, tok in enumerate(t.toks) if len(_letters(tok)) >= 2]
        if words:
            i = words[rng.integers(len(words))]
            t.toks[i] = t.toks[i].upper()
    if u_rep < probs.p_char_repetition:
        last = t.toks[-1]
        if is_punct_token(last):
            t.toks[-1] = last[0] * REPEAT_LENGTH
        else:
            words = [i for i, tok in enumerate(t.toks) if tok[-1:].isalpha()]
            if words:
                i = words[rng.integers(len(words))]
                t.toks[i] = t.toks[i] + t.toks[i][-1] * (REPEAT_LENGTH - 1)
    return t.sentence()


# --------------------------------------------------------------------------
# edit categorisation
# --------------------------------------------------------------------------

EDIT_CATEGORIES = ("capitalization", "punctuation", "contraction",
                   "normalization", "lowercase", "repetition")


def _punct_bag(s: TokenizedSentence) -> dict[str, int]:
    bag: dict[str, int] = {}
    for tok in s.tokens:
        if is_punct_token(tok):
            bag[tok[0]] = bag.get(tok[0], 0) + 1
    return bag


def categorize_edits(source: TokenizedSentence, rewrite: TokenizedSentence,
                     lex: RuleLexicons) -> dict[str, int]:
    """Count edits per category between an informal source and its formal rewrite.

    A rule-driven category counts the tokens its rule family changes, but
    only when applying that family alone brings the source closer (in
    characters) to the rewrite. Punctuation counts both added and removed
    marks, after collapsing runs to their first mark.
    """
    families = {
        "capitalization": lambda x: capitalize(x, lex),
        "contraction": lambda x: expand_contractions(x, lex),
        "normalization": lambda x: replace_slang(x, lex),
        "lowercase": lowercase_shouting,
        "repetition": collapse_repetitions,
    }
    base = char_edit_distance(source.raw, rewrite.raw)
    counts = {}
    for name, fn in families.items():
        new, n = fn(source)
        toward = n and char_edit_distance(new.raw, rewrite.raw) < base
        counts[name] = n if toward else 0
    a, b = _punct_bag(source), _punct_bag(rewrite)
    counts["punctuation"] = sum(abs(a.get(k, 0) - b.get(k, 0)) for k in set(a) | set(b))
    return {k: counts[k] for k in EDIT_CATEGORIES}
