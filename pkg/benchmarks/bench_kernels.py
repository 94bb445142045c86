#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallbacks.

Runs both implementations directly (no env flag needed) and prints
timings plus agreement checks.  The subset-sum kernel is also timed at
the 20-bit cap, the largest size the exact BMO mode accepts.
"""

import time

import numpy as np

from dyadlab._kernels import (
    BACKEND,
    _power_iter_np,
    _zeta_sos_np,
    popcounts,
)

try:
    from dyadlab._kernels import _zeta_sos_nb, _power_iter_nb

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False
    print("numba path unavailable; timing numpy only")


def time_call(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_zeta(nbits):
    rng = np.random.default_rng(0)
    n = 1 << nbits
    seed_a = rng.integers(-1000, 1000, size=n).astype(np.int64)
    seed_b = rng.integers(-1000, 1000, size=n).astype(np.int64)

    a_np, b_np = seed_a.copy(), seed_b.copy()
    t_np = time_call(lambda: _zeta_sos_np(a_np.copy(), b_np.copy(), nbits))
    print(f"zeta_sos  {nbits:2d} bits  numpy  {t_np * 1e3:8.2f} ms")
    if HAS_NUMBA:
        _zeta_sos_nb(seed_a.copy(), seed_b.copy(), nbits)  # compile
        t_nb = time_call(lambda: _zeta_sos_nb(a_np.copy(), b_np.copy(), nbits))
        print(
            f"zeta_sos  {nbits:2d} bits  numba  {t_nb * 1e3:8.2f} ms"
            f"  (x{t_np / t_nb:.1f})"
        )
        x_np, y_np = seed_a.copy(), seed_b.copy()
        x_nb, y_nb = seed_a.copy(), seed_b.copy()
        _zeta_sos_np(x_np, y_np, nbits)
        _zeta_sos_nb(x_nb, y_nb, nbits)
        assert np.array_equal(x_np, x_nb) and np.array_equal(y_np, y_nb)


def bench_power(n):
    rng = np.random.default_rng(1)
    mat = rng.standard_normal((n, n))
    v0 = rng.standard_normal(n)
    t_np = time_call(lambda: _power_iter_np(mat, v0, 1e-10, 10000))
    print(f"power_it  {n:4d}x{n:<4d} numpy  {t_np * 1e3:8.2f} ms")
    if HAS_NUMBA:
        _power_iter_nb(mat, v0, 1e-10, 10000)  # compile
        t_nb = time_call(lambda: _power_iter_nb(mat, v0, 1e-10, 10000))
        print(
            f"power_it  {n:4d}x{n:<4d} numba  {t_nb * 1e3:8.2f} ms"
            f"  (x{t_np / t_nb:.1f})"
        )
        s_np = _power_iter_np(mat, v0, 1e-10, 10000)[0]
        s_nb = _power_iter_nb(mat, v0, 1e-10, 10000)[0]
        assert abs(s_np - s_nb) < 1e-9 * max(1.0, s_np)


def main():
    print(f"selected backend: {BACKEND}")
    popcounts(1 << 16)  # warm the table
    for nbits in (16, 20):
        bench_zeta(nbits)
    for n in (64, 256, 1024):
        bench_power(n)


if __name__ == "__main__":
    main()
