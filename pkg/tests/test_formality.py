import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from formality_bench._io import DataError
from formality_bench.formality import (DENSE_FEATURES, HASH_DIM, LinearFormalityModel, TrainingHyper,
                                       extract_features, predict_formality, predict_formality_batch,
                                       train_formality)
from formality_bench.metrics import spearman
from formality_bench.rules import RuleLexicons, formalize
from formality_bench.synthetic import degrade, formal_sentences, fuzz_sentences, graded_corpus
from formality_bench.textcore import tokenize


def test_feature_examples(lex):
    f = extract_features(tokenize("HELLO!!!"), lex)
    assert f["all_caps_fraction"] == 1.0 and f["punct_run_count"] == 1
    assert f["terminal_exclamation"] == 1.0
    empty = extract_features(tokenize(""), lex)
    assert not empty.dense.any() and len(empty.hash_idx) == 0
    small = RuleLexicons(contractions={}, slang={"u": "you", "r": "are"})
    assert extract_features(tokenize("u r cool"), small)["slang_hits"] == 2
    f = extract_features(tokenize("i didn't know ."), lex)
    assert f["contraction_count"] == 1 and f["lowercase_i_count"] == 1
    assert f["terminal_period"] == 1.0 and f["token_count"] == 4
    assert np.isclose(np.linalg.norm(f.hash_val), 1.0)
    assert f.dim == len(DENSE_FEATURES) + HASH_DIM


def test_features_deterministic(lex):
    a = extract_features(tokenize("Wow sooo cool!!"), lex)
    b = extract_features(tokenize("Wow sooo cool!!"), lex)
    assert np.array_equal(a.dense, b.dense) and np.array_equal(a.hash_idx, b.hash_idx)


def test_zero_model_predicts_bias(lex):
    m = LinearFormalityModel.zeros(0.7)
    for s in ("hi", "", "ARE YOU OK??"):
        assert predict_formality(m, tokenize(s), lex) == 0.7
    assert predict_formality(LinearFormalityModel.zeros(9.0), tokenize("x")) == 3.0


def test_negative_slang_weight_lowers_score(lex):
    m = LinearFormalityModel.zeros()
    m.dense_weights[DENSE_FEATURES.index("slang_hits")] = -0.4
    base = predict_formality(m, tokenize("I will see you tomorrow"), lex)
    more = predict_formality(m, tokenize("I will see you tomorrow u r luv"), lex)
    assert more < base


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 3.0))
def test_linear_before_clamp(alpha):
    rng = np.random.default_rng(0)
    m = LinearFormalityModel(rng.normal(size=len(DENSE_FEATURES)) * 0.01,
                             rng.normal(size=HASH_DIM) * 0.01, 0.0)
    fv = extract_features(tokenize("so what do u think"))
    assert m.raw_score(fv.scaled(alpha)) == pytest.approx(alpha * m.raw_score(fv), rel=1e-9, abs=1e-12)


def test_training_fits_linear_labels_and_loss_decreases(lex):
    rng = np.random.default_rng(1)
    sents = fuzz_sentences(400, rng)
    w = rng.normal(size=len(DENSE_FEATURES))
    y = np.array([extract_features(s, lex).dense @ w for s in sents])
    y = (y - y.mean()) / y.std()
    model = train_formality(sents, y, TrainingHyper(epochs=800), lex)
    hist = np.array(model.training_meta["loss_history"])
    assert np.all(np.diff(hist) <= 1e-12)
    assert model.training_meta["train_mse"] < 0.05


def test_rules_corpus_heldout_correlation(lex):
    sents, labels = graded_corpus(1000, np.random.default_rng(2), lex)
    model = train_formality(sents[:800], labels[:800], lex=lex)
    rho = spearman(predict_formality_batch(model, sents[800:], lex), labels[800:])
    assert rho >= 0.8


def test_formalize_raises_predicted_formality(lex):
    rng = np.random.default_rng(3)
    sents, labels = graded_corpus(800, rng, lex)
    model = train_formality(sents, labels, lex=lex)
    informal = [degrade(s, 3, rng, lex) for s in formal_sentences(200, rng)]
    before = predict_formality_batch(model, informal, lex)
    after = predict_formality_batch(model, [formalize(s, lex) for s in informal], lex)
    assert after.mean() > before.mean()
    assert np.mean(after >= before) >= 0.9


def test_training_reproducible_and_constant_labels(lex):
    sents = [tokenize(t) for t in ("u r cool", "You are cool .", "wat ?", "What is it ?")]
    a = train_formality(sents, [-2, 2, -1, 1], TrainingHyper(epochs=50), lex)
    b = train_formality(sents, [-2, 2, -1, 1], TrainingHyper(epochs=50), lex)
    assert np.array_equal(a.hash_weights, b.hash_weights) and a.bias == b.bias
    c = train_formality(sents, [1.5] * 4, lex=lex)
    assert all(predict_formality(c, s, lex) == 1.5 for s in sents)
    with pytest.raises(ValueError):
        train_formality([], [])
    with pytest.raises(ValueError):
        train_formality(sents, [1, 2])


def test_model_file_round_trip_and_version_check(tmp_path, lex):
    sents, labels = graded_corpus(100, np.random.default_rng(4), lex)
    model = train_formality(sents, labels, TrainingHyper(epochs=50), lex)
    model.save(tmp_path / "m.json")
    back = LinearFormalityModel.load(tmp_path / "m.json")
    assert np.allclose(predict_formality_batch(model, sents), predict_formality_batch(back, sents),
                       rtol=0, atol=1e-12)
    doc = json.loads((tmp_path / "m.json").read_text())
    doc["feature_spec_version"] = "other-v0"
    (tmp_path / "bad.json").write_text(json.dumps(doc))
    with pytest.raises(DataError):
        LinearFormalityModel.load(tmp_path / "bad.json")
    other = LinearFormalityModel.zeros()
    other.feature_spec_version = "other-v0"
    with pytest.raises(ValueError):
        predict_formality(other, tokenize("x"))
