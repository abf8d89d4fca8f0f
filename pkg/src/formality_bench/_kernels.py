"""Hot numeric kernels: edit distance, greedy TER shifting, bootstrap means.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy
version with identical results. The numba path is used when numba imports
and ``FORMALITY_BENCH_PURE_NUMPY`` is unset (or ``0``). Both backends are
always importable through :data:`NUMBA_KERNELS` / :data:`NUMPY_KERNELS` so
tests and the benchmark can compare them directly.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_FLAG = "FORMALITY_BENCH_PURE_NUMPY"
HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get(_FLAG, "0") in ("", "0")


# --------------------------------------------------------------------------
# pure numpy / python implementations
# --------------------------------------------------------------------------

def _levenshtein_np(a: np.ndarray, b: np.ndarray, cutoff: int = -1) -> int:
    if len(a) > len(b):
        a, b = b, a
    n, m = len(a), len(b)
    if n == 0:
        return m
    cols = np.arange(m + 1, dtype=np.int64)
    prev = cols.copy()
    tmp = np.empty(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        cost = (b != a[i - 1]).astype(np.int64)
        tmp[0] = i
        np.minimum(prev[1:] + 1, prev[:-1] + cost, out=tmp[1:])
        # cur[j] = min(tmp[j], cur[j-1] + 1), resolved as a running minimum
        prev = np.minimum.accumulate(tmp - cols) + cols
        if cutoff >= 0 and prev.min() > cutoff:
            return cutoff + 1
    return int(prev[m])


def _levenshtein_batch_np(flat_a, off_a, flat_b, off_b) -> np.ndarray:
    k = len(off_a) - 1
    out = np.empty(k, dtype=np.int64)
    for p in range(k):
        out[p] = _levenshtein_np(flat_a[off_a[p]:off_a[p + 1]],
                                 flat_b[off_b[p]:off_b[p + 1]])
    return out


def _ter_greedy_np(hyp: np.ndarray, ref: np.ndarray, max_block: int,
                   max_dist: int) -> tuple[int, int]:
    cur = hyp.copy()
    n = len(cur)
    ed = _levenshtein_np(cur, ref)
    shifts = 0
    while ed > 1:
        best_gain, best_seq, best_ed = 1, None, ed
        for i in range(n):
            for length in range(1, min(max_block, n - i) + 1):
                block = cur[i:i + length]
                rest = np.concatenate((cur[:i], cur[i + length:]))
                for d in range(n - length + 1):
                    if d == i or abs(d - i) > max_dist:
                        continue
                    cand = np.concatenate((rest[:d], block, rest[d:]))
                    new_ed = _levenshtein_np(cand, ref, ed - best_gain - 1)
                    if ed - new_ed > best_gain:
                        best_gain, best_seq, best_ed = ed - new_ed, cand, new_ed
        if best_seq is None:
            break
        cur, ed = best_seq, best_ed
        shifts += 1
    return ed, shifts


def _bootstrap_means_np(values: np.ndarray, idx: np.ndarray) -> np.ndarray:
    return values[idx].mean(axis=1)


# --------------------------------------------------------------------------
# numba implementations
# --------------------------------------------------------------------------

if HAVE_NUMBA:
    _jit = numba.njit(cache=True, nogil=True)

    @_jit
    def _levenshtein_nb(a, b, cutoff=-1):
        if len(a) > len(b):
            a, b = b, a
        n = len(a)
        m = len(b)
        if n == 0:
            return m
        prev = np.empty(m + 1, dtype=np.int64)
        cur = np.empty(m + 1, dtype=np.int64)
        for j in range(m + 1):
            prev[j] = j
        for i in range(1, n + 1):
            cur[0] = i
            row_min = i
            ai = a[i - 1]
            for j in range(1, m + 1):
                sub = prev[j - 1] + (0 if b[j - 1] == ai else 1)
                ins = cur[j - 1] + 1
                dele = prev[j] + 1
                v = sub
                if ins < v:
                    v = ins
                if dele < v:
                    v = dele
                cur[j] = v
                if v < row_min:
                    row_min = v
            if cutoff >= 0 and row_min > cutoff:
                return cutoff + 1
            prev, cur = cur, prev
        return prev[m]

    @_jit
    def _levenshtein_batch_nb(flat_a, off_a, flat_b, off_b):
        k = len(off_a) - 1
        out = np.empty(k, dtype=np.int64)
        for p in range(k):
            out[p] = _levenshtein_nb(flat_a[off_a[p]:off_a[p + 1]],
                                     flat_b[off_b[p]:off_b[p + 1]], -1)
        return out

    @_jit
    def _ter_greedy_nb(hyp, ref, max_block, max_dist):
        cur = hyp.copy()
        n = len(cur)
        buf = np.empty(n, dtype=cur.dtype)
        ed = _levenshtein_nb(cur, ref, -1)
        shifts = 0
        while ed > 1:
            best_gain = 1
            bi = -1
            bl = -1
            bd = -1
            best_ed = ed
            for i in range(n):
                top = min(max_block, n - i)
                for length in range(1, top + 1):
                    for d in range(n - length + 1):
                        if d == i or abs(d - i) > max_dist:
                            continue
                        # rest = cur without the block; insert block at d
                        w = 0
                        r = 0
                        while w < n:
                            if w == d:
                                for t in range(length):
                                    buf[w] = cur[i + t]
                                    w += 1
                                continue
                            if r == i:
                                r += length
                            buf[w] = cur[r]
                            w += 1
                            r += 1
                        new_ed = _levenshtein_nb(buf, ref, ed - best_gain - 1)
                        if ed - new_ed > best_gain:
                            best_gain = ed - new_ed
                            bi = i
                            bl = length
                            bd = d
                            best_ed = new_ed
            if bi < 0:
                break
            w = 0
            r = 0
            while w < n:
                if w == bd:
                    for t in range(bl):
                        buf[w] = cur[bi + t]
                        w += 1
                    continue
                if r == bi:
                    r += bl
                buf[w] = cur[r]
                w += 1
                r += 1
            cur[:] = buf
            ed = best_ed
            shifts += 1
        return ed, shifts

    @_jit
    def _bootstrap_means_nb(values, idx):
        r, n = idx.shape
        out = np.empty(r, dtype=np.float64)
        for k in range(r):
            s = 0.0
            for t in range(n):
                s += values[idx[k, t]]
            out[k] = s / n
        return out


NUMPY_KERNELS = {
    "levenshtein": _levenshtein_np,
    "levenshtein_batch": _levenshtein_batch_np,
    "ter_greedy": _ter_greedy_np,
    "bootstrap_means": _bootstrap_means_np,
}

if HAVE_NUMBA:
    NUMBA_KERNELS = {
        "levenshtein": _levenshtein_nb,
        "levenshtein_batch": _levenshtein_batch_nb,
        "ter_greedy": _ter_greedy_nb,
        "bootstrap_means": _bootstrap_means_nb,
    }
else:  # pragma: no cover
    NUMBA_KERNELS = dict(NUMPY_KERNELS)

_ACTIVE = NUMBA_KERNELS if USE_NUMBA else NUMPY_KERNELS


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


def levenshtein(a: np.ndarray, b: np.ndarray) -> int:
    return int(_ACTIVE["levenshtein"](a, b, -1))


def levenshtein_batch(flat_a, off_a, flat_b, off_b) -> np.ndarray:
    return _ACTIVE["levenshtein_batch"](flat_a, off_a, flat_b, off_b)


def ter_greedy(hyp: np.ndarray, ref: np.ndarray, max_block: int = 10,
               max_dist: int = 50) -> tuple[int, int]:
    """Return ``(remaining_edits, n_shifts)`` after greedy block shifting."""
    ed, shifts = _ACTIVE["ter_greedy"](hyp, ref, max_block, max_dist)
    return int(ed), int(shifts)


def bootstrap_means(values: np.ndarray, idx: np.ndarray) -> np.ndarray:
    return _ACTIVE["bootstrap_means"](values, idx)
