"""Both kernel backends must agree exactly."""

import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from formality_bench import _kernels

NP, NB = _kernels.NUMPY_KERNELS, _kernels.NUMBA_KERNELS
seqs = st.lists(st.integers(0, 4), max_size=12).map(lambda v: np.array(v, dtype=np.int64))


@given(seqs, seqs)
def test_levenshtein_parity(a, b):
    assert int(NP["levenshtein"](a, b, -1)) == int(NB["levenshtein"](a, b, -1))


@given(seqs, seqs, st.integers(0, 6))
def test_cutoff_only_reports_a_bound(a, b, cutoff):
    exact = int(NP["levenshtein"](a, b, -1))
    for k in (NP, NB):
        got = int(k["levenshtein"](a, b, cutoff))
        if exact <= cutoff:
            assert got == exact
        else:
            assert got > cutoff


@settings(max_examples=60, deadline=None)
@given(seqs, seqs.filter(lambda r: len(r) > 0))
def test_ter_parity(h, r):
    assert tuple(map(int, NP["ter_greedy"](h, r, 10, 50))) == tuple(map(int, NB["ter_greedy"](h, r, 10, 50)))


def test_batch_and_bootstrap_parity():
    rng = np.random.default_rng(0)
    lens_a, lens_b = rng.integers(0, 9, 30), rng.integers(0, 9, 30)
    off_a = np.concatenate(([0], np.cumsum(lens_a))).astype(np.int64)
    off_b = np.concatenate(([0], np.cumsum(lens_b))).astype(np.int64)
    fa = rng.integers(0, 3, off_a[-1]).astype(np.int64)
    fb = rng.integers(0, 3, off_b[-1]).astype(np.int64)
    assert np.array_equal(NP["levenshtein_batch"](fa, off_a, fb, off_b),
                          NB["levenshtein_batch"](fa, off_a, fb, off_b))
    values = rng.normal(size=50)
    idx = rng.integers(0, 50, size=(20, 50))
    np.testing.assert_allclose(NP["bootstrap_means"](values, idx), NB["bootstrap_means"](values, idx),
                               rtol=0, atol=1e-12)


def test_env_flag_selects_numpy():
    env = {**os.environ, "FORMALITY_BENCH_PURE_NUMPY": "1"}
    out = subprocess.run([sys.executable, "-c",
                          "from formality_bench import _kernels; print(_kernels.backend())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


@pytest.mark.parametrize("n", [0, 1])
def test_degenerate_ter(n):
    h = np.zeros(n, dtype=np.int64)
    r = np.array([1], dtype=np.int64)
    for k in (NP, NB):
        assert tuple(map(int, k["ter_greedy"](h, r, 10, 50)))[0] == 1
