"""Numba acceleration toggle.

Hot kernels ship in two flavours: a numba @njit build and the plain
numpy/python source it was compiled from.  The environment variable
REDQUEUE_NO_NUMBA=1 forces the pure path (useful on platforms without a
working numba, and for the benchmark in benchmarks/bench_accel.py, which
times both flavours directly).
"""

import os

_DISABLED = os.environ.get("REDQUEUE_NO_NUMBA", "").lower() in {"1", "true", "yes"}

try:
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _DISABLED


def jit_kernel(func):
    """Compile func with numba if available, else return it unchanged."""
    if HAVE_NUMBA:
        return _njit(cache=True)(func)
    return func


def select(jitted, plain):
    """Pick the active implementation according to the env toggle."""
    return jitted if USE_NUMBA else plain
