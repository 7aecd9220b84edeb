"""Mean-field ODE for the virtual-job sojourn tail, and derived batch curves.

The drift of q(t) = P(V > t) is evaluated through a regularized
incomplete-beta identity rather than the raw alternating sum:

    dq/dt = -q + alpha * [ q * I_q(m, n) - m/(m+n) * I_q(m+1, n) ],

where I_q(a, b) is the regularized incomplete beta function, computed as
the (all-positive) binomial tail sum_{j>=a} C(a+b-1, j) q^j (1-q)^(a+b-1-j).
Differentiating the bracket recovers I_q(m, n), whose double integral is
exactly the alternating sum in the textbook drift, so the two forms agree
analytically; only this one is stable for moderate n.  The alternating
form is kept as a cross-check oracle.
"""

import warnings
from dataclasses import dataclass
from math import comb, fsum

import numpy as np

from ._accel import jit_kernel, select
from .orderstats import MAX_TOTAL, order_stat_tail
from .params import SystemParams, TailCurve


class IntegrationError(RuntimeError):
    """Raised when the fixed-step integration produces a non-finite value."""


@dataclass(frozen=True)
class MeanFieldProblem:
    params: SystemParams
    t_max: float = 15.0
    step: float = 1e-3

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.params.n + self.params.m > MAX_TOTAL:
            raise ValueError(f"n+m must be <= {MAX_TOTAL}")
        min_horizon = 10.0 / (self.params.m + 1)
        if self.t_max < min_horizon:
            raise ValueError(
                f"t_max must be >= {min_horizon:.3g} so the asymptotic slope is observable"
            )


@dataclass
class VirtualTailSolution:
    virtual_tail: TailCurve
    batch_tail: TailCurve
    problem: MeanFieldProblem


def _drift_coefs(n: int, m: int):
    """Binomial-tail coefficient arrays for I_q(m, n) and I_q(m+1, n)."""
    c1 = np.array([comb(n + m - 1, j) for j in range(m, n + m)], dtype=float)
    c2 = np.array([comb(n + m, j) for j in range(m + 1, n + m + 1)], dtype=float)
    return c1, c2


def _drift_impl(q, alpha, mfrac, c1, lo1, tot1, c2, lo2, tot2):
    qc = min(max(q, 0.0), 1.0)
    i1 = 0.0
    for idx in range(c1.shape[0]):
        j = lo1 + idx
        i1 += c1[idx] * qc**j * (1.0 - qc) ** (tot1 - j)
    i2 = 0.0
    for idx in range(c2.shape[0]):
        j = lo2 + idx
        i2 += c2[idx] * qc**j * (1.0 - qc) ** (tot2 - j)
    return -qc + alpha * (qc * i1 - mfrac * i2)


_drift_jit = jit_kernel(_drift_impl)


def _make_rk4(drift, decorate):
    def rk4(q0, h, nsteps, alpha, mfrac, c1, lo1, tot1, c2, lo2, tot2):
        out = np.empty(nsteps + 1)
        q = q0
        out[0] = q
        for s in range(nsteps):
            k1 = drift(q, alpha, mfrac, c1, lo1, tot1, c2, lo2, tot2)
            k2 = drift(q + 0.5 * h * k1, alpha, mfrac, c1, lo1, tot1, c2, lo2, tot2)
            k3 = drift(q + 0.5 * h * k2, alpha, mfrac, c1, lo1, tot1, c2, lo2, tot2)
            k4 = drift(q + h * k3, alpha, mfrac, c1, lo1, tot1, c2, lo2, tot2)
            q = q + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if q < 0.0:
                q = 0.0
            elif q > 1.0:
                q = 1.0
            out[s + 1] = q
        return out

    return decorate(rk4)


_rk4_py = _make_rk4(_drift_impl, lambda f: f)
_rk4_jit = _make_rk4(_drift_jit, jit_kernel) if _drift_jit is not _drift_impl else _rk4_py
_rk4 = select(_rk4_jit, _rk4_py)


def _drift_args(params: SystemParams):
    n, m = params.n, params.m
    c1, c2 = _drift_coefs(n, m)
    mfrac = m / (m + n)
    return params.alpha, mfrac, c1, m, n + m - 1, c2, m + 1, n + m


def ode_rhs(problem: MeanFieldProblem, q: float) -> float:
    """Drift of the virtual-job tail at level q (stable evaluation)."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    return float(_drift_impl(q, *_drift_args(problem.params)))


def ode_rhs_alternating(problem: MeanFieldProblem, q: float) -> float:
    """Verbatim alternating-sum drift (test oracle only; needs m >= 1)."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    n, m = problem.params.n, problem.params.m
    if m < 1:
        raise ValueError("alternating drift form requires m >= 1")
    pref = problem.params.alpha * (n + m - 1) * comb(n + m - 2, n - 1)
    terms = [
        comb(n - 1, i) * (-1) ** i * q ** (m + i + 1) / ((m + i) * (m + i + 1))
        for i in range(n)
    ]
    return -q + pref * fsum(terms)


def solve_virtual_tail(problem: MeanFieldProblem) -> VirtualTailSolution:
    """Integrate the drift from q(0)=1 with classical fixed-step RK4.

    Returns both the virtual-job tail and the coded-batch tail obtained by
    mapping the order-statistic tail over it pointwise.
    """
    params = problem.params
    if params.alpha >= 1:
        warnings.warn(
            f"coded arrival rate alpha={params.alpha:.3g} >= 1; the mean-field "
            "solution is returned but may not describe a stable system",
            stacklevel=2,
        )
    h = problem.step
    nsteps = int(round(problem.t_max / h))
    values = _rk4(1.0, h, nsteps, *_drift_args(params))
    if not np.all(np.isfinite(values)):
        bad = int(np.argmin(np.isfinite(values)))
        raise IntegrationError(
            f"non-finite value at step {bad} (t={bad * h:.6g}, "
            f"q={values[bad - 1] if bad else 1.0!r})"
        )
    times = np.arange(nsteps + 1) * h
    virtual = TailCurve(times, values)
    batch = TailCurve(times, order_stat_tail(params.n, params.m, values))
    return VirtualTailSolution(virtual_tail=virtual, batch_tail=batch, problem=problem)


def tail_exponent(curve: TailCurve, window) -> float:
    """Least-squares slope of log(tail) versus t over [window[0], window[1]]."""
    lo, hi = window
    if lo < curve.times[0] or hi > curve.times[-1] or lo >= hi:
        raise ValueError(f"window {window} must lie inside the curve grid")
    mask = (curve.times >= lo) & (curve.times <= hi)
    t = curve.times[mask]
    v = curve.values[mask]
    if t.size < 2:
        raise ValueError("window contains fewer than two grid points")
    if np.any(v <= 0):
        raise ValueError("curve must be strictly positive on the window")
    slope, _ = np.polyfit(t, np.log(v), 1)
    return float(slope)
