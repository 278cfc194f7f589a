"""Time the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from mpmo.kernels import available_backends


def cases(rng):
    F = rng.random((400, 4))
    off = np.array([0, 2, 4], dtype=np.int64)
    R = rng.random((5000, 6))
    S = rng.random((100, 6))
    off3 = np.array([0, 3, 6], dtype=np.int64)
    Z = rng.random((200_000, 3))
    P = rng.random((60, 3))
    return {
        "nd_rank (400x4)": lambda k: k.nd_rank(F),
        "mp_nd_mask (400, 2x2)": lambda k: k.mp_nd_mask(F, off),
        "igd_min_dist (5000 ref, 100 pts)": lambda k: k.igd_min_dist(R, S, off3),
        "mc_dominated_count (200k samples, 60 pts)": lambda k: k.mc_dominated_count(Z, P),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the fallback is timed")
    rng = np.random.default_rng(0)
    names = list(backends)
    print(f"{'kernel':<44}" + "".join(f"{n:>12}" for n in names) + f"{'speedup':>10}")
    for label, fn in cases(rng).items():
        times = {}
        for name, mod in backends.items():
            times[name] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        row = f"{label:<44}" + "".join(f"{times[n] * 1e3:>10.2f}ms" for n in names)
        if "cython" in times:
            row += f"{times['python'] / times['cython']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
