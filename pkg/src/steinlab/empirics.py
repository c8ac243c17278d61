"""Kolmogorov-Smirnov statistics and log-log rate regression."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Tuple

import numpy as np

from .errors import DomainError, NumericError


def ks_one_sample(sample, cdf: Callable) -> float:
    """``sup_z |F_n(z) - F(z)|`` for a continuous or discontinuous ``cdf``.

    The supremum is attained at a sample point, approached either from the
    left or at the point, so it is the larger of the two one-sided gaps.
    """
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise DomainError("ks_one_sample needs a nonempty sample")
    F = np.asarray(cdf(x), dtype=float)
    # empirical CDF just below / at each distinct point
    below = np.searchsorted(x, x, side="left") / n
    at = np.searchsorted(x, x, side="right") / n
    return float(max(np.max(np.abs(at - F)), np.max(np.abs(F - below))))


def ks_two_sample(a, b) -> float:
    """``sup_z |F_a(z) - F_b(z)|`` over the merged sample."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise DomainError("ks_two_sample needs two nonempty samples")
    z = np.concatenate([a, b])
    Fa = np.searchsorted(a, z, side="right") / a.size
    Fb = np.searchsorted(b, z, side="right") / b.size
    return float(np.max(np.abs(Fa - Fb)))


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    slope_stderr: float
    n_points: int
    theoretical_exponent: Optional[float] = None
    pass_band: float = 0.1

    @property
    def passes(self) -> bool:
        if self.theoretical_exponent is None:
            return False
        return abs(self.slope - self.theoretical_exponent) <= self.pass_band

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "slope_stderr": self.slope_stderr,
            "n_points": self.n_points,
            "theoretical_exponent": self.theoretical_exponent,
            "pass_band": self.pass_band,
            "passes": self.passes,
        }


def fit_rate(points: Iterable[Tuple[float, float]],
             theoretical_exponent: Optional[float] = None,
             pass_band: float = 0.1) -> RateFit:
    """OLS fit of ``log value = intercept + slope * log N``.

    Raises :class:`NumericError` when a value is not positive: the quantity
    has sunk into Monte Carlo noise and more replicates are needed.
    """
    pts = [(float(n), float(v)) for n, v in points]
    if len(pts) < 4:
        raise DomainError(f"need at least 4 points, got {len(pts)}")
    if any(n <= 0 for n, _ in pts):
        raise DomainError("horizons must be positive")
    if any(not (v > 0) for _, v in pts):
        raise NumericError("non-positive value in rate fit; increase replicates")
    x = np.log([n for n, _ in pts])
    # logs of ratios to the first value: scaling all values by a power of
    # two leaves y bit-identical, so the slope is exactly scale invariant
    v = np.array([v for _, v in pts])
    ref = v[0]
    y = np.log(v / ref)
    xm, ym = x.mean(), y.mean()
    dx = x - xm
    sxx = float(dx @ dx)
    if sxx == 0:
        raise DomainError("all horizons coincide")
    slope = float(dx @ (y - ym)) / sxx
    resid = y - (ym - slope * xm) - slope * x
    intercept = float(math.log(ref) + ym - slope * xm)
    sse = float(resid @ resid)
    stderr = math.sqrt(sse / (len(pts) - 2) / sxx)
    return RateFit(slope, intercept, stderr, len(pts), theoretical_exponent, pass_band)
