"""Time the numba and pure-numpy kernel backends on the same inputs.

Usage: python benchmarks/bench_kernels.py [--repeat 5] [--n 8]

Each kernel is compiled (or warmed) once before timing; the table shows
the best of ``--repeat`` runs and the speed-up of numba over numpy.
"""
import argparse
import time

import numpy as np

from bipara import kernels
from bipara._accel import HAVE_NUMBA


def best_of(fn, args, repeat):
    fn(*args)
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t)
    return min(times)


def cases(n, rng):
    side = 1 << n
    batch = rng.standard_normal((side, side))
    plane = rng.standard_normal((side, side))
    m = 14
    cover = rng.random((m, 16)) < 0.3
    cover[np.arange(m), rng.integers(0, 16, m)] = True
    w = rng.random(m)
    masks = np.array([int(sum(1 << i for i in np.flatnonzero(r))) for r in cover], dtype=np.int64)
    return [
        ("analyze_haar", (batch,)),
        ("synth_haar", (batch,)),
        ("analyze_avg", (batch,)),
        ("synth_avg", (batch,)),
        ("maximal_last", (batch,)),
        ("strong_maximal", (plane,)),
        ("subfamily_ratio_max", (cover, w)),
        ("subset_ratio_max", (masks, w, 16)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=8, help="log2 of the grid side")
    args = ap.parse_args()
    if not HAVE_NUMBA:
        print("numba is not installed; only the numpy backend can be timed")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'numpy [ms]':>12}{'numba [ms]':>12}{'speed-up':>10}")
    for name, inputs in cases(args.n, rng):
        t_np = best_of(kernels.NUMPY_KERNELS[name], inputs, args.repeat)
        if HAVE_NUMBA:
            t_nb = best_of(kernels.NUMBA_KERNELS[name], inputs, args.repeat)
            print(f"{name:<22}{t_np * 1e3:>12.3f}{t_nb * 1e3:>12.3f}{t_np / t_nb:>9.1f}x")
        else:
            print(f"{name:<22}{t_np * 1e3:>12.3f}{'-':>12}{'-':>10}")


if __name__ == "__main__":
    main()
