"""Time the numba kernels against their pure-numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--sentences 300] [--repeat 3]

Both backends are called directly, so the FORMALITY_BENCH_PURE_NUMPY flag
does not matter here. The first numba call (compilation or cache load) is
excluded from the timings.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from formality_bench import _kernels
from formality_bench.synthetic import fuzz_sentences, random_token_pairs


def _encode(seqs):
    vocab: dict[str, int] = {}
    return [np.array([vocab.setdefault(t, len(vocab)) for t in s], dtype=np.int64) for s in seqs]


def _flatten(strings):
    cps = [np.frombuffer(s.encode("utf-32-le"), dtype=np.uint32).astype(np.int64) for s in strings]
    off = np.zeros(len(cps) + 1, dtype=np.int64)
    off[1:] = np.cumsum([len(c) for c in cps])
    return (np.concatenate(cps) if cps else np.zeros(0, np.int64)), off


def workloads(n: int, seed: int):
    rng = np.random.default_rng(seed)
    sents = fuzz_sentences(2 * n, rng, max_len=20)
    fa, oa = _flatten([s.raw for s in sents[:n]])
    fb, ob = _flatten([s.raw for s in sents[n:]])
    pairs = random_token_pairs(n, rng, max_len=16, vocab_size=8)
    ter_pairs = []
    for a, b in pairs:
        enc = _encode([a + b])[0]
        ter_pairs.append((enc[:len(a)], enc[len(a):]))
    values = rng.normal(size=500)
    idx = rng.integers(0, 500, size=(2000, 500))
    return {
        "levenshtein_batch": lambda k: k["levenshtein_batch"](fa, oa, fb, ob),
        "ter_greedy": lambda k: [k["ter_greedy"](h, r, 10, 50) for h, r in ter_pairs],
        "bootstrap_means": lambda k: k["bootstrap_means"](values, idx),
    }


def best_of(fn, kernels, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(kernels)
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sentences", type=int, default=300, help="workload size")
    ap.add_argument("--repeat", type=int, default=3, help="timing repeats (best is reported)")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    loads = workloads(args.sentences, args.seed)
    print(f"numba available: {_kernels.HAVE_NUMBA}; active backend: {_kernels.backend()}")
    print(f"{'kernel':<20} {'numpy s':>10} {'numba s':>10} {'speedup':>8}")
    for name, fn in loads.items():
        fn(_kernels.NUMBA_KERNELS)  # warm-up / JIT
        t_np = best_of(fn, _kernels.NUMPY_KERNELS, args.repeat)
        t_nb = best_of(fn, _kernels.NUMBA_KERNELS, args.repeat)
        print(f"{name:<20} {t_np:>10.4f} {t_nb:>10.4f} {t_np / t_nb:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
