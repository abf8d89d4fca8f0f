"""Independent brute-force reference implementations used only by tests.

Nothing here imports the package's metric code. Edit distance is the
textbook O(nm) table; TER shifts are found by trying every (block,
destination) pair on the raw token lists.
"""

from __future__ import annotations

import math
from collections import deque


def count_ngrams(tokens, n):
    counts = {}
    for i in range(len(tokens) - n + 1):
        g = tuple(tokens[i:i + n])
        counts[g] = counts.get(g, 0) + 1
    return counts


def bleu_oracle(candidates, references, max_n=4):
    """Corpus BLEU; orders with no candidate n-grams anywhere are left out of the mean."""
    matches = [0] * max_n
    totals = [0] * max_n
    c_len = r_len = 0
    for cand, refs in zip(candidates, references):
        c_len += len(cand)
        best = None
        for ref in refs:
            key = (abs(len(ref) - len(cand)), len(ref))
            if best is None or key < best:
                best = key
        r_len += best[1]
        for n in range(1, max_n + 1):
            cc = count_ngrams(cand, n)
            clip = {}
            for ref in refs:
                for g, v in count_ngrams(ref, n).items():
                    clip[g] = max(clip.get(g, 0), v)
            for g, v in cc.items():
                matches[n - 1] += min(v, clip.get(g, 0))
                totals[n - 1] += v
    logs = []
    for m, t in zip(matches, totals):
        if t == 0:
            continue
        if m == 0:
            return 0.0
        logs.append(math.log(m / t))
    if not logs:
        return 0.0
    bp = 1.0 if c_len > r_len else math.exp(1 - r_len / c_len) if c_len else 0.0
    return 100.0 * bp * math.exp(sum(logs) / len(logs))


def pinc_oracle(source, candidate, max_n=4):
    parts = []
    for n in range(1, max_n + 1):
        cand = {tuple(candidate[i:i + n]) for i in range(len(candidate) - n + 1)}
        if not cand:
            continue
        src = {tuple(source[i:i + n]) for i in range(len(source) - n + 1)}
        parts.append(1 - len(cand & src) / len(cand))
    return 100.0 * sum(parts) / len(parts)


def lev(a, b):
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i] + [0] * len(b)
        for j, y in enumerate(b, 1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y))
        prev = cur
    return prev[-1]


def _all_shifts(seq):
    n = len(seq)
    for i in range(n):
        for length in range(1, n - i + 1):
            block = seq[i:i + length]
            rest = seq[:i] + seq[i + length:]
            for d in range(len(rest) + 1):
                if d != i:
                    yield rest[:d] + block + rest[d:]


def ter_greedy_oracle(hyp, ref):
    """Edits of greedy TER found by exhaustive search over every shift at each step.

    A shift is applied only when it lowers the edit distance by more than
    the one edit it costs; among equal gains the first in (start, length,
    destination) order wins.
    """
    cur = tuple(hyp)
    ref = tuple(ref)
    shifts = 0
    while True:
        ed = lev(cur, ref)
        best, best_gain = None, 1
        for cand in _all_shifts(cur):
            gain = ed - lev(cand, ref)
            if gain > best_gain:
                best, best_gain = cand, gain
        if best is None:
            return ed + shifts
        cur = best
        shifts += 1


def ter_optimal_oracle(hyp, ref):
    """True minimum of shifts + edits (breadth-first over shift sequences); tiny inputs only."""
    start = tuple(hyp)
    ref = tuple(ref)
    dist = {start: 0}
    queue = deque([start])
    best = lev(start, ref)
    while queue:
        s = queue.popleft()
        c = dist[s]
        best = min(best, c + lev(s, ref))
        if c + 1 >= best:
            continue
        for t in _all_shifts(s):
            if t not in dist:
                dist[t] = c + 1
                queue.append(t)
    return best


def spearman_rank_formula(xs, ys):
    """1 - 6 sum d^2 / (n (n^2 - 1)); valid without ties."""
    def ranks(v):
        order = sorted(range(len(v)), key=lambda i: v[i])
        r = [0] * len(v)
        for k, i in enumerate(order, 1):
            r[i] = k
        return r
    rx, ry = ranks(xs), ranks(ys)
    n = len(xs)
    d2 = sum((a - b) ** 2 for a, b in zip(rx, ry))
    return 1 - 6 * d2 / (n * (n * n - 1))
