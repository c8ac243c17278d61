"""Summation helpers shared by the constants and covariance modules.

The central object is the pair series

    r(l) = sum_{i >= 1} i^-beta (i + l)^-beta,      l >= 0,

which is the autocovariance of the unnormalized moving average and, at
``l = 0``, equals zeta(2 beta).  Terms decay like ``i^-2beta`` with
``2 beta`` close to 1, so plain summation is hopeless; we sum the first
``I - 1`` terms directly and replace the rest by an Euler-Maclaurin
expansion of order two.  Every derivative of ``f(x) = x^-b (x+l)^-b`` of
even order is positive and decreasing, so the remainder of that
expansion is bounded by ``|f'''(I)| / 720``.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import special

#: Number of leading terms summed exactly before switching to the tail.
DEFAULT_HEAD = 1024


def _rising(beta: float, k: int) -> float:
    out = 1.0
    for j in range(k):
        out *= beta + j
    return out


def _derivs(beta: float, x: float, lags: np.ndarray):
    """f, f' and f''' of x^-b (x+l)^-b at a scalar x for every lag."""
    y = x + lags
    g = [(-1) ** k * _rising(beta, k) * x ** (-beta - k) for k in range(4)]
    h = [(-1) ** k * _rising(beta, k) * y ** (-beta - k) for k in range(4)]
    f0 = g[0] * h[0]
    f1 = g[1] * h[0] + g[0] * h[1]
    f3 = g[3] * h[0] + 3 * g[2] * h[1] + 3 * g[1] * h[2] + g[0] * h[3]
    return f0, f1, f3


def pair_series_tail(beta: float, lags, head: int = DEFAULT_HEAD):
    """Euler-Maclaurin value of ``sum_{i >= head} f(i)`` and its error bound.

    Returns two arrays shaped like ``lags``.
    """
    lags = np.atleast_1d(np.asarray(lags, dtype=float))
    x = float(head)
    a, b = 2 * beta - 1, 1 - beta
    integral = np.empty_like(lags)
    zero = lags == 0
    integral[zero] = x ** (1 - 2 * beta) / (2 * beta - 1)
    lz = lags[~zero]
    # int_x^inf t^-b (t+l)^-b dt = l^(1-2b) B(2b-1, 1-b) I_{l/(x+l)}(2b-1, 1-b)
    integral[~zero] = (lz ** (1 - 2 * beta) * special.beta(a, b)
                       * special.betainc(a, b, lz / (x + lz)))
    f0, f1, f3 = _derivs(beta, x, lags)
    value = integral + f0 / 2 - f1 / 12 + f3 / 720
    bound = np.abs(f3) / 720
    return value, bound


def pair_series(beta: float, lags, head: int = DEFAULT_HEAD):
    """``r(l)`` for each requested lag, with a certified error bound.

    The bound covers the Euler-Maclaurin remainder plus a rounding
    allowance for the head sum.
    """
    lags = np.atleast_1d(np.asarray(lags, dtype=np.int64))
    if lags.size and lags.min() < 0:
        raise ValueError("lags must be non-negative")
    lmax = int(lags.max()) if lags.size else 0
    a = np.arange(1, head + lmax + 1, dtype=float) ** -beta
    left = a[: head - 1]
    out = np.empty(lags.shape, dtype=float)
    # windows[l] = a[l : l + head - 1]; chunked to cap memory
    windows = sliding_window_view(a, head - 1)
    flat = lags.ravel()
    res = out.ravel()
    chunk = 1 << 14
    for start in range(0, flat.size, chunk):
        sel = flat[start:start + chunk]
        res[start:start + chunk] = windows[sel] @ left
    tail, bound = pair_series_tail(beta, flat.astype(float), head)
    res += tail
    bound = bound + 8 * np.finfo(float).eps * np.abs(res) * math.log2(head)
    return res.reshape(lags.shape), bound.reshape(lags.shape)
