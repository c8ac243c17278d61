"""Spitzer and Hsu-Robbins series under the limiting-law substitution.

Central regime, with ``c = eps / sigma`` and ``Q = 1 - Phi``:

    f1(eps) = sum_N (1/N) 2 Q(c sqrt(N)),      g1(eps) = sum_N 2 Q(c sqrt(N)).

``Q`` is evaluated as ``erfc(u / sqrt 2) / 2`` (Cephes), which keeps full
relative accuracy far into the tail.  The first ``DIRECT_TERMS`` terms are
summed one by one; the rest by Euler-Maclaurin with the first-derivative
correction.  Both summands have a positive second derivative, so the
Euler-Maclaurin remainder is at most ``(f'(b) - f'(a)) / 12``, and the
part beyond ``N_max`` is bounded by the integral of the (decreasing)
summand.  Both go into ``tail_remainder_bound``.

Non-central regime: the tail probabilities come from a surrogate sample
``z_1..z_n`` of the Hermite law.  The number of ``N >= 1`` with
``|z| > kappa eps N^gamma`` is ``K = ceil((|z| / (kappa eps))^(1/gamma)) - 1``,
so both series are exact sample means of ``H_K`` (harmonic numbers) and
``K``.  Past the largest ``K`` the empirical tail is identically zero,
which is reported as a floor rather than extrapolated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate, special

from .constants import ModelParams, Regime, cov_constant, h_qbeta
from .errors import DomainError

#: Terms summed individually before the Euler-Maclaurin stage.
DIRECT_TERMS = 100_000

#: Smallest surrogate sample accepted by the non-central series.
MIN_SURROGATE = 10_000

#: Argument beyond which ``Q(u)`` underflows double precision.
_U_UNDERFLOW = 40.0

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class SeriesValue:
    epsilon: float
    partial_sum: float
    tail_remainder_bound: float
    n_terms: int
    floor: Optional[int] = None  # last N with nonzero empirical tail (surrogate series)

    @property
    def value(self) -> float:
        return self.partial_sum


def _Q(u):
    return 0.5 * special.erfc(np.asarray(u, dtype=float) / _SQRT2)


def _phi(u):
    return _INV_SQRT_2PI * np.exp(-0.5 * np.asarray(u, dtype=float) ** 2)


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not (eps > 0 and math.isfinite(eps)):
        raise DomainError(f"eps must be positive and finite, got {eps}")
    return eps


def _default_nmax(c: float) -> int:
    # beyond (40 / c)^2 every term is below the smallest double
    return int(min(math.ceil((_U_UNDERFLOW / c) ** 2), 2 ** 62))


def _g_derivs(c: float, x: float):
    """``g(x) = Q(c sqrt x)`` and its first derivative."""
    u = c * math.sqrt(x)
    g = float(_Q(u))
    g1 = -float(_phi(u)) * u / (2 * x)
    return g, g1


def _series(c: float, N_max: int, weighted: bool):
    """Partial sum to ``N_max`` and its remainder bound (EM part only)."""
    n0 = min(N_max, DIRECT_TERMS)
    n = np.arange(1, n0 + 1, dtype=float)
    terms = 2 * _Q(c * np.sqrt(n))
    if weighted:
        terms = terms / n
    direct = math.fsum(terms.tolist())
    if N_max <= n0:
        return direct, 0.0
    a, b = float(n0 + 1), float(N_max)
    ua, ub = c * math.sqrt(a), c * math.sqrt(b)

    def f_and_df(x):
        g, g1 = _g_derivs(c, x)
        if weighted:
            return 2 * g / x, 2 * g1 / x - 2 * g / x ** 2
        return 2 * g, 2 * g1

    fa, dfa = f_and_df(a)
    fb, dfb = f_and_df(b)
    if weighted:
        # int_a^b (2/x) Q(c sqrt x) dx = int_{log ua}^{log ub} 4 Q(e^t) dt
        integral, qerr = integrate.quad(lambda t: 4 * float(_Q(math.exp(t))),
                                        math.log(ua), math.log(ub),
                                        epsabs=1e-13, epsrel=1e-12, limit=400)
    else:
        integral = (4 / c ** 2) * (_T(ua) - _T(ub))
        qerr = 0.0
    em = integral + (fa + fb) / 2 + (dfb - dfa) / 12
    return direct + em, abs(dfb - dfa) / 12 + qerr


def _T(u0: float) -> float:
    """``int_{u0}^inf u Q(u) du``."""
    q, p = float(_Q(u0)), float(_phi(u0))
    return -0.5 * u0 * u0 * q + 0.5 * (u0 * p + q)


def _tail_beyond(c: float, N_max: int, weighted: bool) -> float:
    """Integral majorant of the summands with ``N > N_max``."""
    u0 = c * math.sqrt(N_max)
    q, p = float(_Q(u0)), float(_phi(u0))
    if weighted:
        # int_{u0}^inf 4 Q(u)/u du <= (4/u0) int_{u0}^inf Q(u) du
        return 4 / u0 * (p - u0 * q)
    return 4 / c ** 2 * _T(u0)


def _clt_series(params: ModelParams, sigma: float, eps: float,
                N_max: Optional[int], weighted: bool) -> SeriesValue:
    params.require(Regime.CLT)
    eps = _check_eps(eps)
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    c = eps / sigma
    if N_max is None:
        N_max = _default_nmax(c)
    if int(N_max) != N_max or N_max < 1:
        raise DomainError("N_max must be a positive integer")
    N_max = int(N_max)
    total, em_err = _series(c, N_max, weighted)
    tail = _tail_beyond(c, N_max, weighted)
    return SeriesValue(eps, total, em_err + tail, N_max)


def f1_hat(params: ModelParams, sigma: float, eps: float,
           N_max: Optional[int] = None) -> SeriesValue:
    """``sum_{N<=N_max} (1/N) P(|Z| > eps sqrt(N) / sigma)`` for standard normal ``Z``.

    ``N_max`` defaults to the point where the summand underflows.
    """
    return _clt_series(params, sigma, eps, N_max, weighted=True)


def g1_hat(params: ModelParams, sigma: float, eps: float,
           N_max: Optional[int] = None) -> SeriesValue:
    """As :func:`f1_hat` without the ``1/N`` weight."""
    return _clt_series(params, sigma, eps, N_max, weighted=False)


def nclt_growth(params: ModelParams) -> float:
    """``gamma = 1 + q/2 - beta q``, the threshold growth exponent."""
    return 1 + params.q / 2 - params.beta * params.q


def _surrogate_counts(params: ModelParams, surrogate, eps: float,
                      h: Optional[float]) -> np.ndarray:
    params.require(Regime.NCLT)
    eps = _check_eps(eps)
    z = np.abs(np.asarray(surrogate, dtype=float).ravel())
    if z.size < MIN_SURROGATE:
        raise DomainError(f"surrogate has {z.size} draws, need at least {MIN_SURROGATE}")
    if h is None:
        h = h_qbeta(params, cov_constant(params))
    gamma = nclt_growth(params)
    x = (z / (eps / h)) ** (1 / gamma)
    K = np.ceil(x) - 1
    return np.clip(K, 0, 2.0 ** 62)


def _harmonic(K: np.ndarray) -> np.ndarray:
    return np.where(K > 0, special.digamma(K + 1) + np.euler_gamma, 0.0)


def f2_hat(params: ModelParams, surrogate, eps: float, N_max: Optional[int] = None,
           h: Optional[float] = None) -> SeriesValue:
    """``sum_{N<=N_max} (1/N) P_n(|Z| > eps N^gamma / h)`` from a surrogate sample.

    ``h`` defaults to the renormalization constant under the weight policy
    of ``params``, which must match the one that produced ``surrogate``.
    """
    K = _surrogate_counts(params, surrogate, eps, h)
    kmax = int(K.max())
    cap = kmax if N_max is None else min(int(N_max), kmax)
    Kc = np.minimum(K, cap)
    value = float(np.mean(_harmonic(Kc)))
    beyond = float(np.mean(_harmonic(K) - _harmonic(Kc)))
    return SeriesValue(float(eps), value, beyond, cap, kmax)


def g2_hat(params: ModelParams, surrogate, eps: float, N_max: Optional[int] = None,
           h: Optional[float] = None) -> SeriesValue:
    """As :func:`f2_hat` without the ``1/N`` weight."""
    K = _surrogate_counts(params, surrogate, eps, h)
    kmax = int(K.max())
    cap = kmax if N_max is None else min(int(N_max), kmax)
    Kc = np.minimum(K, cap)
    return SeriesValue(float(eps), float(np.mean(Kc)), float(np.mean(K - Kc)), cap, kmax)


def g2_limit_moment(params: ModelParams, surrogate) -> float:
    """Plug-in ``E|Z|^(1/gamma)`` from the surrogate sample."""
    z = np.abs(np.asarray(surrogate, dtype=float))
    return float(np.mean(z ** (1 / nclt_growth(params))))
