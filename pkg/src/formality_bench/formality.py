"""Sentence formality scorer: surface features plus a ridge-regression model.

Scores live on the -3 (very informal) .. +3 (very formal) annotation scale.
"""

from __future__ import annotations

import json
import logging
import re
import zlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from ._io import DataError, atomic_write
from .rules import RuleLexicons, _is_shouted
from .textcore import TokenizedSentence, is_punct_token

log = logging.getLogger(__name__)

FEATURE_SPEC_VERSION = "surface-trigram-v1"
HASH_BITS = 16
HASH_DIM = 1 << HASH_BITS
SCORE_MIN, SCORE_MAX = -3.0, 3.0

DENSE_FEATURES = (
    "all_caps_fraction",
    "cap_initial_fraction",
    "punct_run_count",
    "contraction_count",
    "slang_hits",
    "swear_hits",
    "mean_word_length",
    "token_count",
    "terminal_period",
    "terminal_question",
    "terminal_exclamation",
    "terminal_other",
    "char_repetition_count",
    "lowercase_i_count",
    "lowercase_initial",
)
_IDX = {name: i for i, name in enumerate(DENSE_FEATURES)}
_LETTER_RUN = re.compile(r"([^\W\d_])\1{2,}")

_default_lex: RuleLexicons | None = None


def _lexicons(lex: RuleLexicons | None) -> RuleLexicons:
    global _default_lex
    if lex is not None:
        return lex
    if _default_lex is None:
        _default_lex = RuleLexicons.default()
    return _default_lex


@dataclass(frozen=True)
class FeatureVector:
    """Dense named features plus an L2-normalised hashed character-trigram block."""

    dense: np.ndarray
    hash_idx: np.ndarray
    hash_val: np.ndarray
    version: str = FEATURE_SPEC_VERSION

    @property
    def dim(self) -> int:
        return len(self.dense) + HASH_DIM

    def scaled(self, alpha: float) -> "FeatureVector":
        return FeatureVector(self.dense * alpha, self.hash_idx, self.hash_val * alpha, self.version)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[:len(self.dense)] = self.dense
        np.add.at(out, len(self.dense) + self.hash_idx, self.hash_val)
        return out

    def __getitem__(self, name: str) -> float:
        return float(self.dense[_IDX[name]])


def _trigram_buckets(tokens: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    counts: dict[int, float] = {}
    for tok in tokens:
        padded = f"<{tok}>"
        for k in range(len(padded) - 2):
            b = zlib.crc32(padded[k:k + 3].encode("utf-8")) & (HASH_DIM - 1)
            counts[b] = counts.get(b, 0.0) + 1.0
    if not counts:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    idx = np.fromiter(sorted(counts), dtype=np.int64, count=len(counts))
    val = np.array([counts[i] for i in idx])
    return idx, val / np.linalg.norm(val)


def extract_features(s: TokenizedSentence, lex: RuleLexicons | None = None) -> FeatureVector:
    lex = _lexicons(lex)
    toks = s.tokens
    words = [t for t in toks if not is_punct_token(t)]
    f = np.zeros(len(DENSE_FEATURES))
    if words:
        f[_IDX["all_caps_fraction"]] = sum(_is_shouted(w) for w in words) / len(words)
        f[_IDX["cap_initial_fraction"]] = sum(w[:1].isupper() for w in words) / len(words)
        f[_IDX["mean_word_length"]] = sum(len(w) for w in words) / len(words)
    f[_IDX["punct_run_count"]] = sum(1 for t in toks if is_punct_token(t) and len(t) > 1)
    lows = [t.lower() for t in toks]
    f[_IDX["contraction_count"]] = sum(1 for t in lows if t in lex.contractions)
    f[_IDX["slang_hits"]] = sum(1 for t in lows if t in lex.slang)
    f[_IDX["swear_hits"]] = sum(1 for t in lows if t in lex.swear)
    f[_IDX["token_count"]] = len(toks)
    if toks:
        last = toks[-1]
        if is_punct_token(last):
            name = {".": "terminal_period", "?": "terminal_question",
                    "!": "terminal_exclamation"}.get(last[0], "terminal_other")
            f[_IDX[name]] = 1.0
    f[_IDX["char_repetition_count"]] = sum(len(_LETTER_RUN.findall(w)) for w in words)
    f[_IDX["lowercase_i_count"]] = sum(1 for t in toks if t == "i" or t.startswith("i'"))
    if words and words[0][:1].islower():
        f[_IDX["lowercase_initial"]] = 1.0
    idx, val = _trigram_buckets(toks)
    return FeatureVector(f, idx, val)


def _design(features: Sequence[FeatureVector]) -> tuple[np.ndarray, sp.csr_matrix]:
    dense = np.vstack([fv.dense for fv in features]) if features else np.zeros((0, len(DENSE_FEATURES)))
    indptr = np.zeros(len(features) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(fv.hash_idx) for fv in features])
    idx = np.concatenate([fv.hash_idx for fv in features]) if features else np.zeros(0, np.int64)
    val = np.concatenate([fv.hash_val for fv in features]) if features else np.zeros(0)
    hashed = sp.csr_matrix((val, idx, indptr), shape=(len(features), HASH_DIM))
    return dense, hashed


# --------------------------------------------------------------------------
# model
# --------------------------------------------------------------------------

@dataclass
class LinearFormalityModel:
    dense_weights: np.ndarray
    hash_weights: np.ndarray
    bias: float
    feature_spec_version: str = FEATURE_SPEC_VERSION
    training_meta: dict = field(default_factory=dict)

    @classmethod
    def zeros(cls, bias: float = 0.0) -> "LinearFormalityModel":
        return cls(np.zeros(len(DENSE_FEATURES)), np.zeros(HASH_DIM), float(bias))

    def raw_score(self, fv: FeatureVector) -> float:
        """Pre-clamp linear score."""
        if fv.version != self.feature_spec_version:
            raise ValueError(
                f"feature spec {fv.version!r} does not match model {self.feature_spec_version!r}")
        return float(fv.dense @ self.dense_weights + fv.hash_val @ self.hash_weights[fv.hash_idx]
                     + self.bias)

    def save(self, path) -> None:
        nz = np.flatnonzero(self.hash_weights)
        doc = {
            "format": "formality-linear",
            "feature_spec_version": self.feature_spec_version,
            "bias": self.bias,
            "dense_features": list(DENSE_FEATURES),
            "dense_weights": self.dense_weights.tolist(),
            "hash_dim": HASH_DIM,
            "hash_weights": {str(int(i)): float(self.hash_weights[i]) for i in nz},
            "training_meta": self.training_meta,
        }
        with atomic_write(path) as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "LinearFormalityModel":
        with open(path, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: not a formality model file ({exc})") from None
        version = doc.get("feature_spec_version")
        if doc.get("format") != "formality-linear" or version != FEATURE_SPEC_VERSION:
            raise DataError(
                f"{path}: feature spec {version!r} is incompatible with {FEATURE_SPEC_VERSION!r}")
        if doc["dense_features"] != list(DENSE_FEATURES) or doc["hash_dim"] != HASH_DIM:
            raise DataError(f"{path}: feature layout mismatch")
        hw = np.zeros(HASH_DIM)
        for k, v in doc["hash_weights"].items():
            hw[int(k)] = v
        return cls(np.asarray(doc["dense_weights"], dtype=float), hw, float(doc["bias"]),
                   version, doc.get("training_meta", {}))


@dataclass(frozen=True)
class TrainingHyper:
    epochs: int = 1000
    l2: float = 1e-4
    rate: float = 1.0  # fraction of the 1/L safe step
    power_iters: int = 50


def _lipschitz(dense: np.ndarray, hashed: sp.csr_matrix, n: int, iters: int) -> float:
    v = np.ones(1 + dense.shape[1] + hashed.shape[1])
    v /= np.linalg.norm(v)
    lam = 0.0
    d = dense.shape[1]
    for _ in range(iters):
        av = v[0] + dense @ v[1:1 + d] + hashed @ v[1 + d:]
        w = np.concatenate(([av.sum()], dense.T @ av, hashed.T @ av)) / n
        lam = float(np.linalg.norm(w))
        if lam == 0.0:
            break
        v = w / lam
    return lam


def train_formality(sentences: Sequence[TokenizedSentence], labels: Sequence[float],
                    hyper: TrainingHyper = TrainingHyper(),
                    lex: RuleLexicons | None = None) -> LinearFormalityModel:
    """Ridge least squares fitted by full-batch gradient descent.

    Dense features are standardised for conditioning and the scaling is
    folded back into the weights, so the returned model is linear in the raw
    :class:`FeatureVector`. The step is ``rate / L`` with ``L`` the gradient
    Lipschitz constant, which keeps the objective non-increasing.
    """
    y = np.asarray(labels, dtype=float)
    if len(sentences) != len(y):
        raise ValueError("sentences and labels differ in length")
    if len(y) == 0:
        raise ValueError("empty training set")
    if not np.all(np.isfinite(y)):
        raise ValueError("labels must be finite")
    meta = {"n_examples": int(len(y)), "epochs": hyper.epochs, "l2": hyper.l2, "rate": hyper.rate}
    if np.all(y == y[0]):
        log.warning("all %d labels equal %g; fitting a bias-only model", len(y), y[0])
        model = LinearFormalityModel.zeros(float(y[0]))
        model.training_meta = {**meta, "epochs": 0, "loss_history": []}
        return model

    feats = [extract_features(s, lex) for s in sentences]
    dense, hashed = _design(feats)
    n, d = dense.shape
    mu = dense.mean(axis=0)
    sd = dense.std(axis=0)
    sd[sd == 0] = 1.0
    z = (dense - mu) / sd

    lip = _lipschitz(z, hashed, n, hyper.power_iters) * 1.05 + hyper.l2
    step = hyper.rate / lip
    b, wz, wh = float(y.mean()), np.zeros(d), np.zeros(HASH_DIM)
    history = []
    for _ in range(hyper.epochs):
        r = b + z @ wz + hashed @ wh - y
        history.append(0.5 * float(r @ r) / n + 0.5 * hyper.l2 * float(wz @ wz + wh @ wh))
        b -= step * float(r.mean())
        wz -= step * (z.T @ r / n + hyper.l2 * wz)
        wh -= step * (hashed.T @ r / n + hyper.l2 * wh)
    r = b + z @ wz + hashed @ wh - y
    history.append(0.5 * float(r @ r) / n + 0.5 * hyper.l2 * float(wz @ wz + wh @ wh))

    dense_w = wz / sd
    bias = b - float(mu @ dense_w)
    meta.update(train_mse=float(r @ r) / n, loss_history=history)
    return LinearFormalityModel(dense_w, wh, bias, FEATURE_SPEC_VERSION, meta)


def predict_formality(model: LinearFormalityModel, s: TokenizedSentence | FeatureVector,
                      lex: RuleLexicons | None = None) -> float:
    fv = s if isinstance(s, FeatureVector) else extract_features(s, lex)
    return float(np.clip(model.raw_score(fv), SCORE_MIN, SCORE_MAX))


def predict_formality_batch(model: LinearFormalityModel, sentences: Sequence[TokenizedSentence],
                            lex: RuleLexicons | None = None) -> np.ndarray:
    return np.array([predict_formality(model, s, lex) for s in sentences])
