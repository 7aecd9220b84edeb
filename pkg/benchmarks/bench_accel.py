"""Benchmark the numba kernels against their pure numpy/python fallbacks.

Times both flavours of every hot kernel directly, independent of the
REDQUEUE_NO_NUMBA toggle (which only selects which flavour the library
calls at run time).

Usage:  python3 benchmarks/bench_accel.py
"""

import timeit
from math import comb

import numpy as np

from redqueue._accel import HAVE_NUMBA
from redqueue.gf import (
    GaloisField,
    _gf_matmul_jit,
    _gf_matmul_numpy,
    _gf_solve_jit,
    _gf_solve_numpy,
)
from redqueue.meanfield import MeanFieldProblem, _drift_args, _rk4_jit, _rk4_py
from redqueue.orderstats import _binom_lower_tail_impl, _binom_lower_tail_jit
from redqueue.params import SystemParams


def bench(label, fast, slow, repeat=5, number=3):
    fast()  # warm (numba compiles on first call)
    slow()
    tf = min(timeit.repeat(fast, repeat=repeat, number=number)) / number
    ts = min(timeit.repeat(slow, repeat=repeat, number=number)) / number
    print(f"{label:<28} numba {tf * 1e3:9.3f} ms   pure {ts * 1e3:9.3f} ms   "
          f"speedup {ts / tf:6.2f}x")


def main():
    print(f"numba available: {HAVE_NUMBA}")
    if not HAVE_NUMBA:
        print("(numba missing: both columns run the pure implementation)")

    q = np.linspace(0.0, 1.0, 200_001)
    coefs = np.array([comb(20, j) for j in range(12)], dtype=float)
    bench(
        "order-stat binomial tail",
        lambda: _binom_lower_tail_jit(q, coefs, 20),
        lambda: _binom_lower_tail_impl(q, coefs, 20),
    )

    prob = MeanFieldProblem(SystemParams(lam=0.5, n=3, m=3, k=1000))
    args = _drift_args(prob.params)
    nsteps = int(round(prob.t_max / prob.step))
    bench(
        "mean-field RK4 (15k steps)",
        lambda: _rk4_jit(1.0, prob.step, nsteps, *args),
        lambda: _rk4_py(1.0, prob.step, nsteps, *args),
        number=1,
    )

    gf = GaloisField.get(256)
    rng = np.random.default_rng(0)
    A = rng.integers(0, 256, (64, 64)).astype(np.int64)
    B = rng.integers(0, 256, (64, 4096)).astype(np.int64)
    q1 = gf.order - 1
    bench(
        "GF(2^8) matmul 64x64x4096",
        lambda: _gf_matmul_jit(A, B, gf.log, gf.exp, q1),
        lambda: _gf_matmul_numpy(A, B, gf.log, gf.exp, q1),
    )

    M = rng.integers(0, 256, (48, 48)).astype(np.int64)
    R = rng.integers(0, 256, (48, 256)).astype(np.int64)
    bench(
        "GF(2^8) solve 48x48",
        lambda: _gf_solve_jit(M.copy(), R.copy(), gf.log, gf.exp, q1),
        lambda: _gf_solve_numpy(M.copy(), R.copy(), gf.log, gf.exp, q1),
    )


if __name__ == "__main__":
    main()
