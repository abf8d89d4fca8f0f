import pytest
from hypothesis import given, strategies as st

from formality_bench._io import DataError
from formality_bench.corpus import (CorpusSplit, ParallelExample, PseudoPair, RejectReason,
                                    FilterConfig, assemble_training_set, corpus_stats,
                                    filter_corpus, filter_sentence, load_gyafc_directory,
                                    partition_by_formality, read_pairs, read_parallel,
                                    subselect_by_edit_distance, upweight_duplicate, write_pairs,
                                    write_parallel, write_stats)
from formality_bench.formality import DENSE_FEATURES, LinearFormalityModel
from formality_bench.textcore import char_edit_distance, tokenize


def words(n):
    return tokenize(" ".join(f"w{i}" for i in range(n)))


def test_filter_examples():
    assert filter_sentence(words(4)) == RejectReason.TOO_SHORT
    assert filter_sentence(words(5)) is None
    assert filter_sentence(words(25)) is None
    assert filter_sentence(words(26)) == RejectReason.TOO_LONG
    assert filter_sentence(tokenize("what ?")) == RejectReason.QUESTION
    assert filter_sentence(tokenize("is it really you ??? ok then")) == RejectReason.QUESTION
    assert filter_sentence(tokenize("see http://x.y for the answer")) == RejectReason.URL
    assert filter_sentence(tokenize("go to www.example for more")) == RejectReason.URL
    assert filter_sentence(tokenize("i found it on google.com last week")) == RejectReason.URL


def test_filter_reason_order_and_flags():
    assert filter_sentence(tokenize("http://a.com ?")) == RejectReason.QUESTION
    cfg = FilterConfig(reject_questions=False, reject_urls=False)
    assert filter_sentence(tokenize("is www.a.com a good site , really ?"), cfg) is None
    with pytest.raises(ValueError):
        FilterConfig(min_tokens=10, max_tokens=5)


def test_filter_is_a_fixed_point(rng):
    from formality_bench.synthetic import fuzz_sentences
    kept, rejected = filter_corpus(fuzz_sentences(300, rng))
    again, rejected2 = filter_corpus(kept)
    assert again == kept and not rejected2
    assert len(kept) + len(rejected) == 300


def test_partition_threshold_semantics():
    # score = token_count - 2, so one, two and three tokens give -1, 0 and +1
    model = LinearFormalityModel.zeros(-2.0)
    model.dense_weights[DENSE_FEATURES.index("token_count")] = 1.0
    sents = [tokenize("a"), tokenize("c d"), tokenize("e f g")]
    informal, formal = partition_by_formality(sents, model)
    assert [s.raw for s in informal] == ["a"]
    assert [s.raw for s in formal] == ["e f g"]
    informal, formal = partition_by_formality(sents, model, threshold=-0.5)
    assert [s.raw for s in formal] == ["c d", "e f g"]


def test_partition_with_bias_only_model():
    sents = [tokenize("x y"), tokenize("z")]
    informal, formal = partition_by_formality(sents, LinearFormalityModel.zeros(-0.5))
    assert len(informal) == 2 and not formal
    informal, formal = partition_by_formality(sents, LinearFormalityModel.zeros(0.0))
    assert not informal and not formal


def pair(a, b, pid="p"):
    return PseudoPair(pid, tokenize(a), tokenize(b), "test")


def test_subselect_strict_threshold():
    base = "hello there friend"
    p0 = pair(base, base, "d0")
    p11 = pair(base, base + "y" * 11, "d11")
    p40 = pair(base, "z" * 40 + base, "d40")
    p10 = pair(base, base + "y" * 10, "d10")
    dists = [char_edit_distance(p.source.raw, p.target.raw) for p in (p0, p11, p40, p10)]
    assert dists == [0, 11, 40, 10]
    assert [p.id for p in subselect_by_edit_distance([p0, p11, p40, p10])] == ["d11", "d40"]
    assert [p.id for p in subselect_by_edit_distance([p0, p11], 0)] == ["d11"]
    assert subselect_by_edit_distance([(tokenize("ab"), tokenize("abc"))], 0)


def test_upweight_and_assemble():
    base = list(range(50))
    assert len(upweight_duplicate(base, 6)) == 300
    assert upweight_duplicate(base, 1) == base
    assert upweight_duplicate([], 5) == []
    assert upweight_duplicate([1, 2], 2) == [1, 2, 1, 2]
    with pytest.raises(ValueError):
        upweight_duplicate(base, 0)
    assert len(assemble_training_set(base, 6, list(range(300)))) == 600
    assert assemble_training_set(base, 1) == base
    assert len(assemble_training_set(base, 10, [0] * 300, [1] * 600)) == 1400


@given(st.lists(st.integers(), max_size=20), st.integers(1, 6))
def test_upweight_size(xs, k):
    assert len(upweight_duplicate(xs, k)) == k * len(xs)


def split_of(pairs, name="train"):
    return CorpusSplit(name, [ParallelExample(f"e{i}", tokenize(a), (tokenize(b),))
                              for i, (a, b) in enumerate(pairs)])


def test_corpus_stats_examples():
    st1 = corpus_stats(split_of([("ab", "ab")]))
    assert st1.edit_distance_mean == 0 and st1.edit_distance_std == 0
    st2 = corpus_stats(split_of([("a", "a" + "b" * 10), ("a", "a" + "b" * 30)]))
    assert st2.edit_distance_mean == pytest.approx(20.0)
    assert st2.edit_distance_std == pytest.approx(10.0)
    assert st2.source_formality_mean is None
    st3 = corpus_stats(split_of([("u r here", "You are here .")]), LinearFormalityModel.zeros(1.5))
    assert st3.source_formality_mean == 1.5 and st3.reference_length_mean == 4
    with pytest.raises(ValueError):
        corpus_stats(CorpusSplit("test", []))


def test_stats_writers(tmp_path):
    stats = corpus_stats(split_of([("a b", "A b .")]))
    write_stats(stats, tmp_path / "s.json", tmp_path / "s.txt")
    assert "edit_distance_mean: 3.0000" in (tmp_path / "s.txt").read_text()
    assert '"n_pairs": 1' in (tmp_path / "s.json").read_text()


def test_split_validation():
    ex = ParallelExample("a", tokenize("x"), (tokenize("y"),))
    CorpusSplit("train", [ex]).validate()
    with pytest.raises(DataError):
        CorpusSplit("test", [ex]).validate()
    with pytest.raises(DataError):
        CorpusSplit("train", [ex, ex]).validate()
    with pytest.raises(ValueError):
        ParallelExample("b", tokenize("x"), ())
    with pytest.raises(ValueError):
        CorpusSplit("dev")


def test_parallel_and_pairs_round_trip(tmp_path):
    split = CorpusSplit("test", [ParallelExample(
        "t1", tokenize("u r cool"), tuple(tokenize(f"You are cool {i} .") for i in range(4)))])
    write_parallel(tmp_path / "p.tsv", split)
    back = read_parallel(tmp_path / "p.tsv")
    assert back.examples[0].references[3].raw == "You are cool 3 ."
    pairs = [PseudoPair("a", tokenize("x y"), tokenize("X y ."), "self_train"),
             PseudoPair("b", tokenize("p"), tokenize("q"), "back_translation")]
    write_pairs(tmp_path / "pairs.tsv", pairs)
    assert [p.provenance for p in read_pairs(tmp_path / "pairs.tsv")] == ["self_train", "back_translation"]
    (tmp_path / "bad.tsv").write_text("only\tone\n")
    with pytest.raises(DataError):
        read_pairs(tmp_path / "bad.tsv")
    (tmp_path / "bad2.tsv").write_text("id\n")
    with pytest.raises(DataError):
        read_parallel(tmp_path / "bad2.tsv")


def test_load_gyafc_layout(tmp_path):
    d = tmp_path / "test"
    d.mkdir()
    (d / "informal").write_text("u r here\nnooo\n")
    for k in range(4):
        (d / f"formal.ref{k}").write_text(f"You are here {k} .\nNo {k} .\n")
    (d / "informal.ref0").write_text("ignored\nignored\n")
    split = load_gyafc_directory(d, "test")
    split.validate()
    assert len(split) == 2 and len(split.examples[1].references) == 4
    (d / "formal.ref3").write_text("short\n")
    with pytest.raises(DataError):
        load_gyafc_directory(d, "test")
