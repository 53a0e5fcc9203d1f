"""Time the compiled closure kernel against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from artifact import kernels
from artifact.gf import GF
from artifact.oracle import linearize
from artifact.acceptance import random_generating_set
from artifact.trans import GroupSpec, tv_matrix

CASES = [("SL", 2, 25), ("SL", 3, 3), ("SU", 3, 9), ("Sp", 4, 3), ("SL", 3, 5)]


def generators(family, n, q):
    spec = GroupSpec.make(family, n, GF(q))
    F = spec.field
    mats = [tv_matrix(t) for t in random_generating_set(spec, np.random.default_rng(q))]
    return F, np.ascontiguousarray(np.stack([linearize(F, m) for m in mats]).astype(np.uint8))


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--cap", type=int, default=10 ** 6)
    args = ap.parse_args()
    if kernels.BACKEND != "cython":
        print("compiled kernel not available; only the fallback can be timed")
    print(f"{'group':<10}{'order':>10}{'python s':>12}{'cython s':>12}{'speedup':>10}")
    for family, n, q in CASES:
        F, gens = generators(family, n, q)
        tp, res = best_of(lambda: kernels.python_bfs_closure(gens, F.p, args.cap), args.repeat)
        order = len(res[0])
        if kernels.BACKEND == "cython":
            tc, res_c = best_of(lambda: kernels.bfs_closure(gens, F.p, args.cap), args.repeat)
            assert len(res_c[0]) == order
            print(f"{family}({n},{q})".ljust(10) + f"{order:>10}{tp:>12.3f}{tc:>12.4f}{tp / tc:>9.1f}x")
        else:
            print(f"{family}({n},{q})".ljust(10) + f"{order:>10}{tp:>12.3f}{'-':>12}{'-':>10}")


if __name__ == "__main__":
    main()
