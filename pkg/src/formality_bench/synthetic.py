"""Seeded generators for synthetic corpora.

These feed the test suite, the acceptance checks and the kernel benchmark.
Everything is driven by an explicit ``numpy.random.Generator`` so the same
seed always yields the same corpus.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .rules import ReverseRuleProbabilities, RuleLexicons, informalize
from .textcore import TokenizedSentence, tokenize

SUBJECTS = ("I", "You", "We", "They", "My sister", "Your friend", "The teacher",
            "Our neighbour", "His brother", "The manager")
AUXILIARIES = ("do not", "cannot", "will", "would", "should", "are going to", "want to",
               "have to", "did not", "could")
VERBS = ("love", "visit", "call", "help", "understand", "remember", "believe",
         "watch", "meet", "forgive")
OBJECTS = ("your husband", "the movie", "my parents", "that song", "the answer",
           "your family", "the new teacher", "this question", "our house", "the game")
CLAUSES = ("because it is late", "because you are kind", "before Friday",
           "after the party", "if you please", "with my friends", "in London",
           "on Saturday", "because I know you", "at the moment")


def formal_sentences(n: int, rng: np.random.Generator) -> list[TokenizedSentence]:
    """Well-formed sentences assembled from fixed slot fillers."""
    out = []
    for _ in range(n):
        parts = [SUBJECTS[rng.integers(len(SUBJECTS))],
                 AUXILIARIES[rng.integers(len(AUXILIARIES))],
                 VERBS[rng.integers(len(VERBS))],
                 OBJECTS[rng.integers(len(OBJECTS))]]
        if rng.random() < 0.6:
            parts.append(CLAUSES[rng.integers(len(CLAUSES))])
        out.append(tokenize(" ".join(parts) + " ."))
    return out


def _elongate(tok: str, rng: np.random.Generator) -> str:
    return tok + tok[-1] * int(rng.integers(2, 6)) if tok[-1:].isalpha() else tok


def degrade(s: TokenizedSentence, level: int, rng: np.random.Generator,
            lex: RuleLexicons) -> TokenizedSentence:
    """Apply ``level`` (0..4) cumulative informality operations to a formal sentence.

    1: reverse rules (lowercasing, contractions, slang); 2: elongate a word;
    3: shout a word and turn the final period into a run of "!";
    4: also drop the remaining capitalisation and add a second elongation.
    """
    if level <= 0:
        return s
    sid = str(rng.integers(1 << 31))
    toks = list(informalize(s, lex, ReverseRuleProbabilities(0.0, 0.0, 0), sid).tokens)
    words = [i for i, t in enumerate(toks) if t[-1:].isalpha()]
    if level >= 2 and words:
        i = words[rng.integers(len(words))]
        toks[i] = _elongate(toks[i], rng)
    if level >= 3:
        if words:
            i = words[rng.integers(len(words))]
            if len(toks[i]) >= 2:
                toks[i] = toks[i].upper()
        if toks and toks[-1] == ".":
            toks[-1] = "!" * int(rng.integers(2, 5))
    if level >= 4:
        toks = [t.lower() if not t.isupper() else t for t in toks]
        if words:
            i = words[rng.integers(len(words))]
            toks[i] = _elongate(toks[i], rng)
    return TokenizedSentence.from_tokens(toks)


def graded_corpus(n: int, rng: np.random.Generator, lex: RuleLexicons | None = None
                  ) -> tuple[list[TokenizedSentence], np.ndarray]:
    """Sentences at informality levels 0..4 with formality labels ``2 - level``."""
    lex = lex or RuleLexicons.default()
    base = formal_sentences(n, rng)
    levels = rng.integers(0, 5, size=n)
    sents = [degrade(s, int(k), rng, lex) for s, k in zip(base, levels)]
    return sents, 2.0 - levels.astype(float)


def random_token_pairs(n: int, rng: np.random.Generator, max_len: int = 8,
                       vocab_size: int = 10) -> list[tuple[list[str], list[str]]]:
    """Short random token sequences over a tiny vocabulary (both sides non-empty)."""
    pairs = []
    for _ in range(n):
        v = int(rng.integers(1, vocab_size + 1))
        a = [f"w{i}" for i in rng.integers(0, v, size=int(rng.integers(1, max_len + 1)))]
        b = [f"w{i}" for i in rng.integers(0, v, size=int(rng.integers(1, max_len + 1)))]
        pairs.append((a, b))
    return pairs


def markov_corpus(n: int, rng: np.random.Generator, vocab: Sequence[str],
                  min_len: int = 4, max_len: int = 12, stickiness: float = 0.7
                  ) -> list[TokenizedSentence]:
    """Sentences from a random first-order chain over ``vocab``.

    Each word has a preferred successor drawn once, followed with probability
    ``stickiness``; this gives the corpus real n-gram structure for LM tests.
    """
    vocab = list(vocab)
    succ = rng.permutation(len(vocab))
    out = []
    for _ in range(n):
        length = int(rng.integers(min_len, max_len + 1))
        w = int(rng.integers(len(vocab)))
        toks = [vocab[w]]
        for _ in range(length - 1):
            w = int(succ[w]) if rng.random() < stickiness else int(rng.integers(len(vocab)))
            toks.append(vocab[w])
        out.append(TokenizedSentence.from_tokens(toks))
    return out


def domain_corpora(n_in: int, n_out: int, rng: np.random.Generator, vocab_size: int = 15
                   ) -> tuple[list[TokenizedSentence], list[TokenizedSentence]]:
    """In-domain and out-of-domain corpora over disjoint vocabularies."""
    vin = [f"in{i}" for i in range(vocab_size)]
    vout = [f"out{i}" for i in range(vocab_size)]
    return markov_corpus(n_in, rng, vin), markov_corpus(n_out, rng, vout)


_FUZZ_PIECES = ("u", "ur", "r", "coz", "luv", "wanna", "im", "dont", "can't", "won't",
                "I'm", "i", "i'm", "y'all", "shit", "damn", "fuck", "PARIS", "london",
                "nooooo", "sooooo", "yesss", "!!!", "???", "?!", "...", ",", ".", "lol",
                "OMG", "Hello", "hey", "the", "cat", "going", "to", "do", "not", "ain't",
                "s***", "café", "naïve", "u.s.", "e-mail", "'", "\"", "it's", "john's",
                "HAHAHA", "ok", "A", "a", "be", "aaa", "zzzz", ":)", "--", "well...")


def fuzz_sentences(n: int, rng: np.random.Generator, max_len: int = 14) -> list[TokenizedSentence]:
    """Messy random sentences mixing lexicon entries, case noise and punctuation runs."""
    out = []
    for _ in range(n):
        k = int(rng.integers(1, max_len + 1))
        toks = []
        for _ in range(k):
            tok = _FUZZ_PIECES[rng.integers(len(_FUZZ_PIECES))]
            r = rng.random()
            if r < 0.15:
                tok = tok.upper()
            elif r < 0.25:
                tok = tok.capitalize()
            elif r < 0.32 and tok[-1:].isalpha():
                tok = tok + tok[-1] * int(rng.integers(1, 5))
            toks.append(tok)
        joiner = [" " if rng.random() < 0.8 else "" for _ in toks]
        raw = "".join(j + t for j, t in zip(joiner, toks)).strip()
        out.append(tokenize(raw))
    return out
