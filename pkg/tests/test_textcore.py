import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from formality_bench import _kernels
from formality_bench.textcore import (TokenizedSentence, char_edit_distance, char_edit_distances,
                                      detokenize, ngrams, token_edit_distance, tokenize)
import oracles


def test_tokenize_examples():
    assert tokenize("Gotta see both sides.").tokens == ("Gotta", "see", "both", "sides", ".")
    assert tokenize("").tokens == ()
    assert tokenize("   ").tokens == ()
    assert tokenize("ARE YOU KIDDING ME????").tokens == ("ARE", "YOU", "KIDDING", "ME", "????")


def test_tokenize_keeps_interior_apostrophes_and_censoring():
    assert tokenize("I didn't know.").tokens == ("I", "didn't", "know", ".")
    assert tokenize("what the s***!").tokens == ("what", "the", "s***", "!")
    assert tokenize("(hello)").tokens == ("(", "hello", ")")
    assert tokenize("...").tokens == ("...",)


def test_space_flags_round_trip():
    s = tokenize("him . Well, ok!!")
    assert s.tokens == ("him", ".", "Well", ",", "ok", "!!")
    assert s.space_before == (False, True, True, False, True, False)
    assert TokenizedSentence.from_tokens(s.tokens, s.space_before).raw == s.raw
    assert s.n_chars == len(s.raw)


def test_detokenize_joins_with_spaces():
    assert detokenize(["a", "b", "."]) == "a b ."


_text = st.text(alphabet="abcAB '.!?,*-é\t", max_size=40)


@given(_text)
def test_tokenize_is_lossless_modulo_whitespace(raw):
    s = tokenize(raw)
    assert "".join(s.tokens) == "".join(raw.split())
    if raw.strip():
        assert s.tokens
    assert tokenize(" ".join(s.tokens)).tokens == s.tokens


def test_char_edit_distance_examples():
    assert char_edit_distance("hello", "hello") == 0
    assert char_edit_distance("", "abc") == 3
    assert char_edit_distance("kitten", "sitting") == 3
    assert char_edit_distance("café", "cafe") == 1


def test_token_edit_distance_examples():
    assert token_edit_distance(["a", "b"], ["a", "b"]) == 0
    assert token_edit_distance([], list("abcd")) == 4
    assert token_edit_distance(["a", "b", "c"], ["a", "c"]) == 1


_short = st.text(alphabet="abcxyz", max_size=12)


@given(_short, _short, _short)
def test_edit_distance_metric_properties(a, b, c):
    ab, ba = char_edit_distance(a, b), char_edit_distance(b, a)
    assert ab == ba == oracles.lev(a, b)
    assert ab <= max(len(a), len(b))
    assert (ab == 0) == (a == b)
    assert char_edit_distance(a, c) <= ab + char_edit_distance(b, c)
    if not a or not b:
        assert ab == max(len(a), len(b))


@settings(max_examples=50)
@given(st.lists(st.tuples(_short, _short), max_size=8))
def test_batch_matches_single(pairs):
    expected = [char_edit_distance(a, b) for a, b in pairs]
    assert list(char_edit_distances(pairs)) == expected


def test_ngrams_examples():
    assert dict(ngrams(["a", "b", "a"], 1).entries) == {("a",): 2, ("b",): 1}
    assert dict(ngrams(["a", "b"], 3).entries) == {}
    assert dict(ngrams(list("abab"), 2).entries) == {("a", "b"): 2, ("b", "a"): 1}
    with pytest.raises(ValueError):
        ngrams(["a"], 0)


@given(st.lists(st.sampled_from("abc"), max_size=10), st.integers(1, 5))
def test_ngram_total(tokens, n):
    assert ngrams(tokens, n).total == max(0, len(tokens) - n + 1)


def test_kernel_backend_reported():
    assert _kernels.backend() in ("numba", "numpy")
    a = np.array([1, 2, 3], dtype=np.int64)
    assert _kernels.levenshtein(a, a[::-1].copy()) == 2
