"""Compare the compiled and pure-Python decision kernels on the hot loops.

Usage: python3 benchmarks/bench_kernels.py [--words N] [--repeat R]
"""

import argparse
import time

from denoisemix.kernels import _decisions_py, _speedups
from denoisemix.rng import Rng, poisson_cdf_table


def bench(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--words", type=int, default=1_000_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    backends = [("python", _decisions_py)]
    if _speedups is not None:
        backends.append(("cython", _speedups))
    else:
        print("note: compiled extension not built, benchmarking python only")

    state = Rng(42).state
    cdf = poisson_cdf_table(3.5)
    n = args.words
    rows = []
    for name, mod in backends:
        t_rep = bench(lambda m=mod: m.draw_replacements(state, n, 0.4, 4), args.repeat)
        seq = 100
        t_mask = bench(
            lambda m=mod: [
                m.draw_span_mask(state + i, seq, 35, cdf) for i in range(n // seq)
            ],
            args.repeat,
        )
        rows.append((name, t_rep, t_mask))

    print(f"{'backend':<10} {'replacements':>14} {'span masking':>14}   ({n:,} words each)")
    for name, t_rep, t_mask in rows:
        print(f"{name:<10} {t_rep:>12.3f}s {t_mask:>12.3f}s")
    if len(rows) == 2:
        print(
            f"{'speedup':<10} {rows[0][1] / rows[1][1]:>13.1f}x {rows[0][2] / rows[1][2]:>13.1f}x"
        )


if __name__ == "__main__":
    main()
