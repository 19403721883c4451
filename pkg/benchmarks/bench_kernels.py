"""Compare the compiled and pure-Python PAVA kernels.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5] [--sizes 100,1000,10000,100000]

Prints per-call timings for both backends and an end-to-end adaptive band
build (n = 1000, 25 points) with each backend swapped in.
"""

import argparse
import time
import timeit

import numpy as np

from hulc import kernels, simlab


def time_pava(n, backend, repeat):
    rng = np.random.default_rng(n)
    y = np.sort(rng.uniform(size=n)) + rng.normal(scale=0.3, size=n)
    w = rng.uniform(0.5, 2.0, n)
    number = max(1, 20_000 // n)
    best = min(timeit.repeat(lambda: kernels.pava(y, w, backend=backend), number=number, repeat=repeat))
    return best / number


def time_band(backend, subsamples):
    data = simlab.gen_monotone(1000, "fig8", np.random.default_rng(0))
    saved = kernels._impl
    kernels._impl = kernels._kernels_py if backend == "python" else saved
    try:
        t0 = time.perf_counter()
        simlab.build_band(data, simlab.band_points(1000), 0.05, "adaptive", rng=1, subsamples=subsamples)
        return time.perf_counter() - t0
    finally:
        kernels._impl = saved


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sizes", default="100,1000,10000,100000")
    ap.add_argument("--subsamples", type=int, default=1000)
    args = ap.parse_args(argv)

    backends = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])
    if len(backends) == 1:
        print("compiled extension not available; timing the fallback only")

    print(f"{'n':>8} " + " ".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    for n in (int(s) for s in args.sizes.split(",")):
        t = [time_pava(n, b, args.repeat) for b in backends]
        row = f"{n:>8} " + " ".join(f"{v * 1e6:>10.1f}us" for v in t)
        if len(t) == 2:
            row += f" {t[0] / t[1]:>10.1f}x"
        print(row)

    print(f"\nadaptive band, n=1000, 25 points, {args.subsamples} subsamples")
    for b in backends:
        print(f"  {b:>7}: {time_band(b, args.subsamples):.2f}s")


if __name__ == "__main__":
    main()
