"""Timing comparison of the compiled and pure-Python coordinate-sweep kernels.

Usage: python3 benchmarks/bench_sweep.py [--n 100] [--reps 20]
"""

import argparse
import time

import numpy as np

from hrris import kernels
from hrris.surface import PhaseCodebook


def make_problem(rng, n, nt=8, nr=2, n_active=4):
    h1 = (rng.standard_normal((n, nt)) + 1j * rng.standard_normal((n, nt))) * 1e-4
    f = (rng.standard_normal((nt, nr)) + 1j * rng.standard_normal((nt, nr))) * 0.2
    h2 = (rng.standard_normal((nr, n)) + 1j * rng.standard_normal((nr, n))) * 1e-3
    rows = np.ascontiguousarray(h1 @ f)
    return dict(
        uT=np.ascontiguousarray(h2.T),
        rows=rows,
        s=np.ascontiguousarray((np.abs(rows) ** 2).sum(axis=1)),
        mask=np.ascontiguousarray(
            np.isin(np.arange(n), rng.choice(n, n_active, replace=False)), dtype=np.uint8
        ),
        book=np.ascontiguousarray(PhaseCodebook.from_bits(2).values),
    )


def run_once(kernel, p, n, grid=16):
    alphas = np.ones(n)
    thetas = np.zeros(n)
    return kernel(
        p["uT"], p["rows"], p["s"], alphas, thetas, p["mask"], p["book"],
        1e-13, 1e-13, 1e-7, 1e-3, grid,
    )


def bench(kernel, problems, n, reps):
    run_once(kernel, problems[0], n)  # warm up
    t0 = time.perf_counter()
    se = 0.0
    for i in range(reps):
        se = run_once(kernel, problems[i % len(problems)], n)
    dt = (time.perf_counter() - t0) / reps
    return dt, se


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=100, help="surface elements")
    ap.add_argument("--reps", type=int, default=20)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    problems = [make_problem(rng, args.n) for _ in range(5)]

    t_py, se_py = bench(kernels.python_sweep, problems, args.n, args.reps)
    print(f"python  sweep: {t_py * 1e3:8.2f} ms/call  (SE {se_py:.4f})")
    if kernels.HAVE_COMPILED:
        t_cy, se_cy = bench(kernels.compiled_sweep, problems, args.n, args.reps)
        print(f"compiled sweep: {t_cy * 1e3:7.2f} ms/call  (SE {se_cy:.4f})")
        print(f"speedup: {t_py / t_cy:.1f}x")
    else:
        print("compiled kernel not built; only the fallback was timed")


if __name__ == "__main__":
    main()
