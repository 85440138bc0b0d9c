"""Time the numba kernels against the numpy / plain-python fallbacks.

    python benchmarks/bench_kernels.py --repeat 3

Each case runs once untimed (numba compiles, tables get built), then ``--repeat`` times per backend;
the best time is reported.  Outputs of both backends are compared before timing.
"""

import argparse
import time

import numpy as np

from fieldred import kernels
from fieldred.gf import field_of_order
from fieldred.linsets import _fibers, _leading_one, linset_from_subspace, pseudoregulus_witness
from fieldred.projgeo import PointSpace
from fieldred.reduction import standard_vfr
from fieldred.semilinear import gl_matrices


def case_batch_det(q, r):
    ctx = field_of_order(q)
    mats = gl_matrices(ctx, r)
    return f"batch_det GL({r},{q}) x{len(mats)}", lambda: kernels.batch_det(ctx, mats)


def case_point_images(q, n, count, seed=0):
    ctx = field_of_order(q)
    ps = PointSpace(ctx, n)
    rng = np.random.default_rng(seed)
    mats = rng.integers(0, q, size=(count, n, n))
    return (f"point_images PG({n - 1},{q}) x{count}",
            lambda: kernels.point_images(ctx, mats, ps.vectors, ps.weights, ps.point_of))


def case_witness_dfs(t):
    f = standard_vfr(2, t, 2)
    L = linset_from_subspace(f, pseudoregulus_witness(f))
    allowed, fiber = _fibers(f, L)
    first = np.sort(_leading_one(np.flatnonzero(allowed), 2, f.n))
    return (f"witness_dfs pseudoregulus t={t}",
            lambda: kernels.witness_dfs(allowed, fiber, L.size, 2, f.n, t, first, True)[:2])


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not kernels.HAVE_NUMBA:
        raise SystemExit("numba unavailable (or FIELDRED_DISABLE_NUMBA set); nothing to compare")

    cases = [
        case_batch_det(4, 3),
        case_batch_det(2, 4),
        case_point_images(2, 6, 20000),
        case_point_images(4, 4, 5000),
        case_point_images(9, 3, 5000),
        case_witness_dfs(3),
        case_witness_dfs(4),
    ]
    print(f"{'case':42s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s}")
    for name, fn in cases:
        res = {}
        times = {}
        for flag in (True, False):
            kernels.use_numba(flag)
            res[flag] = fn()
            times[flag] = best_of(fn, args.repeat)
        kernels.use_numba(True)
        same = res[True] == res[False] if isinstance(res[True], tuple) else np.array_equal(res[True], res[False])
        flag = "" if same else "  MISMATCH"
        print(f"{name:42s} {times[True]:10.4f} {times[False]:10.4f} {times[False] / times[True]:8.1f}x{flag}")


if __name__ == "__main__":
    main()
