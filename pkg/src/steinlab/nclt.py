"""Kernel quantities of the non-central limit.

Everything here uses the literal weights ``alpha_i = i^-beta`` (no
rescaling), with ``d`` and ``h`` calibrated to ``c_beta`` accordingly.
Writing ``r(l) = sum_{i>=1} i^-beta (i+l)^-beta`` and
``a = 2 beta q - q - 2``:

* ``||g_N||^2 = N^a sum_{n,k<=N} r(|n-k|)^q``
* ``<g_N, g>  ~ 2 d N^a sum_{l=1}^{N} (N - l) r(l)^q`` (asymptotic
  reduction; :func:`g_inner_quad` evaluates the exact integral for small N)
* ``err_sq = ||g_N / (h q!) - g||^2`` expanded with ``q! ||g||^2 = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache, partial

import numpy as np
from scipy import integrate, special

from .constants import (ModelParams, Regime, c_beta, cov_constant, d_qbeta,
                        h_qbeta)
from .errors import DomainError
from .paths import (DEFAULT_TRUNC_FACTOR, PathSimulator, map_replicates,
                    offset_replicate, z_nclt)
from .hermite import hermite_paper
from .series import pair_series

#: Largest horizon accepted by the quadrature oracle.
QUAD_MAX_N = 32


@dataclass(frozen=True)
class KernelError:
    N: int
    g_norm_sq: float
    inner: float
    err_sq: float
    theoretical_exponent: float

    @property
    def is_flagged(self) -> bool:
        """Negative beyond the tolerance allowed for the asymptotic inner product."""
        return self.err_sq < -1e-8


@lru_cache(maxsize=32)
def _r_table(beta: float, n_lags: int) -> np.ndarray:
    r, _ = pair_series(beta, np.arange(n_lags))
    r.setflags(write=False)
    return r


def _kernel_constants(params: ModelParams):
    params.require(Regime.NCLT)
    c = c_beta(params.beta)
    return d_qbeta(params, c), h_qbeta(params, c)


def _exponent(params: ModelParams) -> float:
    return 2 * params.beta * params.q - params.q - 2


def _check_N(N: int) -> int:
    if int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N}")
    return int(N)


def _lag_double_sum(params: ModelParams, N: int) -> float:
    """``sum_{n,k<=N} r(|n-k|)^q = N r(0)^q + 2 sum_{l<N} (N-l) r(l)^q``."""
    rq = _r_table(params.beta, N + 1)[:N] ** params.q
    w = N - np.arange(N, dtype=float)
    return N * rq[0] + 2 * math.fsum((w[1:] * rq[1:]).tolist())


def g_norm_sq(params: ModelParams, N: int) -> float:
    """``||g_N||^2`` as an O(N) sum over lags."""
    params.require(Regime.NCLT)
    N = _check_N(N)
    return N ** _exponent(params) * _lag_double_sum(params, N)


def g_inner(params: ModelParams, N: int) -> float:
    """Asymptotic form of ``<g_N, g>``: ``2 d N^a sum_{l=1}^{N} (N-l) r(l)^q``."""
    d, _ = _kernel_constants(params)
    N = _check_N(N)
    if N == 1:
        return 0.0
    rq = _r_table(params.beta, N + 1)[1:N + 1] ** params.q
    w = N - np.arange(1, N + 1, dtype=float)
    return 2 * d * N ** _exponent(params) * math.fsum((w * rq).tolist())


def shifted_pair_sum(beta: float, k: int, upper: int) -> float:
    """``sum_{i=k+1}^{upper} i^-beta (i-k)^-beta``.

    The ``i = k`` term is infinite and is left out; with it gone the sum
    equals ``sum_{j=1}^{upper-k} j^-beta (j+k)^-beta`` after ``j = i - k``.
    """
    i = np.arange(k + 1, upper + 1, dtype=float)
    return math.fsum((i ** -beta * (i - k) ** -beta).tolist())


def _pair_tail_real(beta: float, x: float, lags: np.ndarray) -> np.ndarray:
    """``sum_{i>=x} i^-beta (i+l)^-beta`` for real ``|l| << x`` (Euler-Maclaurin)."""
    a, b = 2 * beta - 1, 1 - beta
    lags = np.asarray(lags, dtype=float)
    # integral from x; for l < 0 shift t -> t - l so the lag is positive
    start = np.where(lags < 0, x + lags, x)
    ll = np.abs(lags)
    integral = np.where(
        ll == 0, start ** (1 - 2 * beta) / a,
        np.where(ll == 0, 1.0, ll) ** (1 - 2 * beta) * special.beta(a, b)
        * special.betainc(a, b, ll / (start + ll)))
    y = x + lags
    f0 = x ** -beta * y ** -beta
    f1 = -beta * f0 * (1 / x + 1 / y)
    return integral + f0 / 2 - f1 / 12


def _phi(beta: float, s: np.ndarray, head: int) -> np.ndarray:
    """``sum_i i^-beta [(s+i+1)_+^(1-beta) - (s+i)_+^(1-beta)] / (1-beta)``.

    Terms ``i < head`` are summed directly; beyond that each term equals
    ``int_0^1 i^-beta (i+s+y)^-beta dy``, replaced by its midpoint value
    (relative error ~ 1e-8 at the default head) and summed by
    Euler-Maclaurin.
    """
    b = 1 - beta
    i = np.arange(1, head, dtype=float)[:, None]
    s = np.asarray(s, dtype=float)[None, :]
    hi = np.maximum(s + i + 1, 0.0) ** b
    lo = np.maximum(s + i, 0.0) ** b
    head_sum = np.sum(i ** -beta * (hi - lo), axis=0) / b
    tail = _pair_tail_real(beta, float(head), s[0] + 0.5)
    return head_sum + tail


def g_inner_quad(params: ModelParams, N: int, head: int = 4096,
                 epsabs: float = 1e-11, epsrel: float = 1e-9) -> float:
    """Quadrature value of ``<g_N, g>`` without the asymptotic reduction.

    With ``s = N u - n`` the inner ``y`` integral is closed form and

        <g_N, g> = d N^(2 beta q - q - 2) sum_j w_j int_j^{j+1} Phi(s)^q ds,

    ``w_j`` counting the ``n`` whose window ``[-n, N-n]`` covers the unit
    cell ``[j, j+1]``.  Each cell is integrated adaptively (the integrand
    has a square-root-type kink at the cell's left end).
    """
    d, _ = _kernel_constants(params)
    N = _check_N(N)
    if N > QUAD_MAX_N:
        raise DomainError(f"quadrature oracle is limited to N <= {QUAD_MAX_N}")
    q, beta = params.q, params.beta

    def f(s):
        return float(_phi(beta, np.array([s]), head)[0]) ** q

    total = 0.0
    for j in range(-N, N):
        w = min(N, N - j - 1) - max(1, -j) + 1
        if w <= 0:
            continue
        val, _ = integrate.quad(f, j, j + 1, epsabs=epsabs, epsrel=epsrel, limit=200)
        total += w * val
    return d * N ** _exponent(params) * total


def kernel_error(params: ModelParams, N: int) -> KernelError:
    """Squared L2 distance between ``g_N / (h q!)`` and the limit kernel."""
    d, h = _kernel_constants(params)
    N = _check_N(N)
    fact = math.factorial(params.q)
    gn = g_norm_sq(params, N)
    gi = g_inner(params, N)
    err = gn / (h * fact) ** 2 - 2 * gi / (h * fact) + 1 / fact
    return KernelError(N, gn, gi, err, 2 * params.beta * params.q - params.q - 1)


def renorm_second_moment(params: ModelParams, N: int) -> float:
    """``E[(N^(beta q - q/2 - 1) S_N / h)^2]`` for the untruncated model."""
    _, h = _kernel_constants(params)
    N = _check_N(N)
    return g_norm_sq(params, N) / (h * h * math.factorial(params.q))


def _surrogate_draw(params: ModelParams, sim: PathSimulator, h: float, replicate: int) -> float:
    X = sim.path(replicate).X
    s = math.fsum(hermite_paper(params.q, X).tolist())
    return z_nclt(params, h, sim.N, s)


def hermite_surrogate_sample(params: ModelParams, N_ref: int, reps: int, seed: int,
                             trunc_factor: int = DEFAULT_TRUNC_FACTOR,
                             threads: int = 1, offset: int = 0) -> np.ndarray:
    """``reps`` independent values of the renormalized sum at horizon ``N_ref``.

    Their law approximates the Hermite distribution of order ``q``; the
    gap decays like ``N_ref^(2 beta q - q - 1)`` with an unknown constant.
    The simulation uses the caller's weight policy and ``h`` is computed
    with the matching covariance constant, so the scaling is policy free.
    ``offset`` shifts the replicate indices, giving seed-disjoint batches.
    """
    params.require(Regime.NCLT)
    N_ref = _check_N(N_ref)
    if reps < 1:
        raise DomainError("reps must be >= 1")
    h = h_qbeta(params, cov_constant(params))
    M = trunc_factor * N_ref
    sim = PathSimulator(params, N_ref, M, seed)
    func = partial(_surrogate_draw, params, sim, h)
    if offset:
        func = partial(offset_replicate, func, offset)
    return np.array(map_replicates(func, reps, threads), dtype=float)
