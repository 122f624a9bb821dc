"""Compare the compiled and pure-Python solver kernels.

    python3 benchmarks/bench_kernels.py [--starts 2000] [--repeat 3]

Times a batch of random starts per (method, order, dim) case on each
available backend and prints starts/second and the speedup.
"""
import argparse
import time

import numpy as np

from tenseig import _core
from tenseig.enumeration import initial_points
from tenseig.models import random_gaussian_symmetric

CASES = [("ncm", 3, 3), ("oncm", 3, 3), ("oncm", 4, 6), ("oncm", 4, 8), ("ashopm", 4, 6)]
NEWTON = {"ncm": 0, "oncm": 1}


def run_case(kern, method, m, n, X0):
    T = random_gaussian_symmetric(m, n, 0)
    if method in NEWTON:
        return kern.newton_batch(T.flat, n, m, X0, NEWTON[method], 1e-10, 200)
    return kern.power_batch(T.flat, n, m, X0, 2, 0.0, 1e-6, 1, 1e-10, 200)


def best_time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--starts", type=int, default=2000)
    ap.add_argument("--python-starts", type=int, default=200, help="the fallback is slow; time fewer starts")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = sorted(_core.BACKENDS)
    print(f"backends: {', '.join(backends)}")
    print(f"{'method':>7} {'m':>2} {'n':>2} " + " ".join(f"{b + ' starts/s':>18}" for b in backends) + "   speedup")
    for method, m, n in CASES:
        rates = {}
        for b in backends:
            S = args.python_starts if b == "python" else args.starts
            X0 = initial_points(n, 1, 0, S)
            rates[b] = S / best_time(lambda: run_case(_core.BACKENDS[b], method, m, n, X0), args.repeat)
        speed = f"{rates['compiled'] / rates['python']:8.1f}x" if len(rates) == 2 else "       -"
        print(f"{method:>7} {m:>2} {n:>2} " + " ".join(f"{rates[b]:18.0f}" for b in backends) + "  " + speed)


if __name__ == "__main__":
    main()
