"""Compare the compiled and numpy Sturm kernels.

Usage: python benchmarks/bench_kernels.py [--sizes 4096 65536] [--repeat 3]
"""

import argparse
import time

import numpy as np

from sepspec import kernels
from sepspec.oracle import Grid, discretize
from sepspec.potential import parse_potential


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[4095, 32767])
    p.add_argument("--eigenvalues", type=int, default=32)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    backends = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])
    V = parse_potential("x^4 - x^2")
    print(f"{'N':>8} {'op':>8} " + " ".join(f"{b:>10}" for b in backends) + "   speedup  identical")
    for n in args.sizes:
        T = discretize(V, 1e-3, Grid(1.4, n))
        k0 = int(kernels.sturm_counts(T.diagonal, T.off2, np.array([0.0]), T.pivmin)[0])
        idx = np.arange(k0, k0 + args.eigenvalues, dtype=np.int64)
        lo, hi = T.gershgorin()
        shifts = np.linspace(-0.05, 0.05, 64)
        ops = {
            "counts": lambda b: kernels.sturm_counts(T.diagonal, T.off2, shifts, T.pivmin, backend=b),
            "bisect": lambda b: kernels.bisect_indices(T.diagonal, T.off2, idx, lo, hi, T.pivmin,
                                                       threads=1, backend=b),
        }
        for name, op in ops.items():
            res = {b: _best(lambda: op(b), args.repeat) for b in backends}
            same = len({res[b][1].tobytes() for b in backends}) == 1
            speed = res["python"][0] / res[backends[-1]][0]
            print(f"{n:>8} {name:>8} " + " ".join(f"{res[b][0]:>9.4f}s" for b in backends)
                  + f"   {speed:>7.1f}x  {same}")


if __name__ == "__main__":
    main()
