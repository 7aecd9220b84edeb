"""Model constants and evaluated tail curves."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SystemParams:
    """Single source of model constants.

    lam: per-server job arrival intensity (batches arrive at rate lam*k/n)
    n:   batch size
    m:   coding redundancy (n+m coded jobs per batch)
    d:   replication factor
    k:   number of servers
    """

    lam: float
    n: int = 1
    m: int = 0
    d: int = 1
    k: int = 1000

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.m < 0:
            raise ValueError(f"m must be >= 0, got {self.m}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if self.k < max(self.n + self.m, self.d):
            raise ValueError(
                f"k must be >= max(n+m, d) = {max(self.n + self.m, self.d)}, got {self.k}"
            )

    @property
    def alpha(self) -> float:
        """Per-queue coded arrival rate lam*(n+m)/n (always recomputed)."""
        return self.lam * (self.n + self.m) / self.n


# Tolerance for floating-point jitter when checking monotonicity of curves.
_MONO_TOL = 1e-12


@dataclass
class TailCurve:
    """A complementary-CDF sampled on a strictly increasing time grid."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.ndim != 1 or self.times.shape != self.values.shape:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if self.times.size < 2:
            raise ValueError("curve needs at least two grid points")
        if not np.all(np.diff(self.times) > 0):
            raise ValueError("time grid must be strictly increasing")
        if np.any(self.values < -_MONO_TOL) or np.any(self.values > 1 + _MONO_TOL):
            raise ValueError("curve values must lie in [0, 1]")
        if np.any(np.diff(self.values) > _MONO_TOL):
            raise ValueError("tail values must be non-increasing in time")

    def interp(self, t):
        """Linear interpolation of the tail at time(s) t (clamped to the grid ends)."""
        return np.interp(t, self.times, self.values)
