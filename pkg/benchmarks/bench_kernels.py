"""Compare the numba kernels against their numpy counterparts.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--pairs 200000]

Prints one line per kernel: best wall time of each backend, the speed-up and
the max relative difference of the outputs.
"""
import argparse
import time

import numpy as np

from nonloc_mt import _backend, _kernels


def best_of(fn, repeat):
    fn()  # warm-up (JIT compile on the first numba call)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def rel_diff(a, b):
    a, b = np.atleast_1d(a), np.atleast_1d(b)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def cases(pairs, rng):
    x = rng.random((pairs, 2))
    y = rng.random((pairs, 2))
    ux, uy = x[:, 0], y[:, 0]
    r1 = rng.uniform(0.05, 1.0, 2000)
    r2 = rng.uniform(0.05, 1.0, 2000)
    s = rng.uniform(0.25, 0.45, 500)  # outside both intervals, so every value is finite
    lo = np.tile([0.0, 0.5], (s.size, 1))
    hi = np.tile([0.2, 1.0], (s.size, 1))
    return [
        ("pair_kernel_sum", lambda: _kernels.pair_kernel_sum_nb(x, y, ux, uy, 0.1, 4.0),
         lambda: _kernels.pair_kernel_sum_np(x, y, ux, uy, 0.1, 4.0)),
        ("angular_kernel d=2", lambda: _kernels.angular_kernel_nb(2, 2.0, r1, r2),
         lambda: _kernels.angular_kernel_np(2, 2.0, r1, r2)),
        ("angular_kernel d=3", lambda: _kernels.angular_kernel_nb(3, 1.5, r1, r2),
         lambda: _kernels.angular_kernel_np(3, 1.5, r1, r2)),
        ("radial_inner d=2", lambda: _kernels.radial_inner_nb(2, 2.0, s, lo, hi),
         lambda: _kernels.radial_inner_np(2, 2.0, s, lo, hi)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--pairs", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)
    if not _backend.HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return 1
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<22}{'numba [s]':>12}{'numpy [s]':>12}{'speed-up':>10}{'max rel diff':>14}")
    for name, nb, npy in cases(args.pairs, rng):
        t_nb, o_nb = best_of(nb, args.repeat)
        t_np, o_np = best_of(npy, args.repeat)
        print(f"{name:<22}{t_nb:>12.4g}{t_np:>12.4g}{t_np / t_nb:>10.3g}{rel_diff(o_nb, o_np):>14.3g}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
