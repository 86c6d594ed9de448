#!/usr/bin/env python3
"""Time the numba kernels against their pure-numpy fallbacks.

Both implementations live in leakwave._kernels regardless of which one the
LEAKWAVE_BACKEND flag selects, so a single process can benchmark the pair.

    python benchmarks/bench_kernels.py [--repeats N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from leakwave import _kernels
from leakwave._backend import HAVE_NUMBA, active_backend


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_cosine_bank(repeats):
    rng = np.random.default_rng(0)
    n_bands, n_samples = 100, 51200 * 4
    t = np.arange(n_samples) / 51200.0
    amps = rng.uniform(0.5, 2.0, n_bands)
    omegas = 2 * np.pi * rng.uniform(20.0, 10_000.0, n_bands)
    phases = rng.uniform(0, np.pi, n_bands)

    rows = {}
    out_np = np.zeros_like(t)
    rows["numpy"] = timeit(
        lambda: _kernels._cosine_bank_numpy(t, amps, omegas, phases, out_np * 0.0),
        repeats,
    )
    if HAVE_NUMBA:
        out_nb = np.zeros_like(t)
        _kernels._cosine_bank_numba(t, amps, omegas, phases, out_nb)  # warm up JIT
        rows["numba"] = timeit(
            lambda: _kernels._cosine_bank_numba(t, amps, omegas, phases, out_nb * 0.0),
            repeats,
        )
        ref = _kernels._cosine_bank_numpy(t, amps, omegas, phases, np.zeros_like(t))
        got = _kernels._cosine_bank_numba(t, amps, omegas, phases, np.zeros_like(t))
        assert np.allclose(ref, got, rtol=1e-12, atol=1e-12)
    return f"cosine_bank ({n_bands} bands x {n_samples} samples)", rows


def bench_solve_batch(repeats):
    rng = np.random.default_rng(1)
    n = 20_000
    a = rng.normal(size=(n, 4, 4)) + 1j * rng.normal(size=(n, 4, 4))
    a += 4.0 * np.eye(4)  # keep the systems well conditioned
    b = rng.normal(size=(n, 4)) + 1j * rng.normal(size=(n, 4))

    rows = {}
    rows["numpy"] = timeit(lambda: _kernels._solve4_batch_numpy(a, b), repeats)
    if HAVE_NUMBA:
        _kernels._solve4_batch_numba(a, b)  # warm up JIT
        rows["numba"] = timeit(lambda: _kernels._solve4_batch_numba(a, b), repeats)
        ref = _kernels._solve4_batch_numpy(a, b)
        got = _kernels._solve4_batch_numba(a, b)
        assert np.allclose(ref, got, rtol=1e-10, atol=1e-12)
    return f"solve_batch ({n} complex 4x4 systems)", rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    print(f"active backend: {active_backend()}  (numba available: {HAVE_NUMBA})")
    for bench in (bench_cosine_bank, bench_solve_batch):
        label, rows = bench(args.repeats)
        print(f"\n{label}")
        for name, seconds in rows.items():
            print(f"  {name:6s} {seconds * 1e3:9.2f} ms")
        if "numba" in rows:
            print(f"  speedup {rows['numpy'] / rows['numba']:.2f}x")


if __name__ == "__main__":
    main()
