"""Stein-Malliavin quantity for the central regime.

For ``Z_N = S_N / (sigma sqrt(N))`` with ``S_N = sum H_q(X_n)`` the
Malliavin statistic is

    T = q / (sigma^2 N (q!)^2) * h' R h,      h_n = He_{q-1}(X_n),

where ``R`` is the Toeplitz matrix of ``rho``.  The ``(q!)^-2`` is what
makes ``E[T] -> 1``; the debug flag ``uncorrected=True`` drops it so the
discrepancy can be shown numerically.  Any of the four classical
distances to N(0, 1) is then at most ``c * sqrt(E[(1 - T)^2])``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import partial
from typing import Dict, Optional, Sequence

import numpy as np
import scipy.fft
from scipy.linalg import toeplitz

from .constants import (EstimateWithError, ModelParams, Regime,
                        classify_regime)
from .covariance import CovarianceTable, build_table
from .empirics import fit_rate
from .errors import DomainError, LagRangeError
from .hermite import hermite_prob
from .paths import DEFAULT_TRUNC_FACTOR, PathBatch, PathSimulator, map_replicates

#: Horizon up to which the quadratic form is evaluated densely by default.
DIRECT_FORM_LIMIT = 2048


class DistanceKind(str, enum.Enum):
    KOLMOGOROV = "Kolmogorov"
    WASSERSTEIN = "Wasserstein"
    TOTAL_VARIATION = "TotalVariation"
    FORTET_MOURIER = "FortetMourier"

    @property
    def constant(self) -> float:
        return _DISTANCE_CONSTANTS[self]


_DISTANCE_CONSTANTS = {
    DistanceKind.KOLMOGOROV: 1.0,
    DistanceKind.WASSERSTEIN: 1.0,
    DistanceKind.TOTAL_VARIATION: 2.0,
    DistanceKind.FORTET_MOURIER: 4.0,
}


@dataclass(frozen=True)
class SteinEstimate:
    N: int
    reps: int
    mean_T: EstimateWithError
    msq: EstimateWithError
    bound: float
    distance_kind: DistanceKind = DistanceKind.KOLMOGOROV

    def for_distance(self, kind: DistanceKind) -> "SteinEstimate":
        kind = DistanceKind(kind)
        return SteinEstimate(self.N, self.reps, self.mean_T, self.msq,
                             kind.constant * math.sqrt(self.msq.value), kind)


# --------------------------------------------------------------------------
# Toeplitz quadratic forms


def toeplitz_form_direct(rho: np.ndarray, h: np.ndarray) -> float:
    """``h' R h`` with a dense ``R``; O(N^2) memory."""
    n = len(h)
    R = toeplitz(rho[:n])
    return float(h @ (R @ h))


def _circulant_spectrum(rho: np.ndarray, n: int) -> tuple[np.ndarray, int]:
    # first column [rho_0..rho_{n-1}, 0, rho_{n-1}..rho_1] of length 2n
    L = 2 * n
    col = np.zeros(L)
    col[:n] = rho[:n]
    col[n + 1:] = rho[1:n][::-1]
    return scipy.fft.rfft(col), L


def toeplitz_form_fft(rho: np.ndarray, h: np.ndarray,
                      spectrum: Optional[tuple] = None) -> float:
    """``h' R h`` by circulant embedding; O(N log N)."""
    n = len(h)
    spec, L = spectrum if spectrum is not None else _circulant_spectrum(rho, n)
    Rh = scipy.fft.irfft(scipy.fft.rfft(h, L) * spec, L)[:n]
    return float(h @ Rh)


class ToeplitzForm:
    """Precomputed ``h -> h' R h`` for a fixed size, reused across replicates.

    Small sizes keep the dense matrix; larger ones keep the circulant
    spectrum.
    """

    DENSE_LIMIT = 256

    def __init__(self, rho: np.ndarray, n: int):
        if n > len(rho):
            raise LagRangeError(f"need {n} lags, have {len(rho)}")
        self.n = n
        if n <= self.DENSE_LIMIT:
            self._R = toeplitz(rho[:n])
            self._spectrum = None
        else:
            self._R = None
            self._spectrum = _circulant_spectrum(rho, n)

    def __call__(self, h: np.ndarray) -> float:
        if self._R is not None:
            return float(h @ (self._R @ h))
        return toeplitz_form_fft(None, h, self._spectrum)


def toeplitz_form(rho: np.ndarray, h: np.ndarray, method: str = "auto") -> float:
    n = len(h)
    if n > len(rho):
        raise LagRangeError(f"quadratic form of size {n} needs {n} lags, have {len(rho)}")
    if method == "auto":
        method = "direct" if n <= DIRECT_FORM_LIMIT else "fft"
    if method == "direct":
        return toeplitz_form_direct(rho, h)
    if method == "fft":
        return toeplitz_form_fft(rho, h)
    raise DomainError(f"unknown method {method!r}")


# --------------------------------------------------------------------------
# The statistic and its exact moments


def _t_scale(q: int, sigma_sq: float, N: int, uncorrected: bool) -> float:
    fact = 1 if uncorrected else math.factorial(q) ** 2
    return q / (sigma_sq * N * fact)


def stein_T(params: ModelParams, cov: CovarianceTable, batch: PathBatch,
            sigma_sq: float, method: str = "auto", uncorrected: bool = False) -> float:
    """Malliavin statistic ``T`` of one path.

    ``uncorrected=True`` omits the ``(q!)^-2`` factor (debug only).
    """
    params.require(Regime.CLT)
    X = np.asarray(batch.X)
    N = len(X)
    if cov.m_max < N - 1:
        raise LagRangeError(f"table has {cov.m_max + 1} lags, path length {N}")
    h = hermite_prob(params.q - 1, X)
    return _t_scale(params.q, sigma_sq, N, uncorrected) * toeplitz_form(cov.rho, h, method)


def mean_T_exact(params: ModelParams, cov: CovarianceTable, sigma_sq: float, N: int) -> float:
    """``E[T]`` as an O(N) lag sum (exact for unit-variance ``X``)."""
    params.require(Regime.CLT)
    if N < 1:
        raise DomainError("N must be >= 1")
    if cov.m_max < N - 1:
        raise LagRangeError(f"need {N} lags, table has {cov.m_max + 1}")
    q = params.q
    r = cov.rho[:N] ** q
    weights = N - np.arange(N, dtype=float)
    total = weights[0] * r[0] + 2 * math.fsum((weights[1:] * r[1:]).tolist())
    return total / (sigma_sq * N * math.factorial(q))


def _q2_matrices(cov: CovarianceTable, sigma_sq: float, N: int):
    if cov.m_max < N - 1:
        raise LagRangeError(f"need {N} lags, table has {cov.m_max + 1}")
    R = toeplitz(cov.rho[:N])
    C = (2.0 / (sigma_sq * N * 4.0)) * R
    return C, R


def stein_exact_q2(cov: CovarianceTable, sigma_sq: float, N: int,
                   return_parts: bool = False):
    """Exact ``E[(1 - T)^2]`` for ``q = 2`` from Gaussian quadratic-form traces.

    With ``T = x'Cx`` and ``x ~ N(0, R)``: ``E[T] = tr(CR)`` and
    ``Var(T) = 2 tr(CRCR)``.
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    C, R = _q2_matrices(cov, sigma_sq, N)
    CR = C @ R
    mean = float(np.trace(CR))
    var = 2.0 * float(np.sum(CR * CR.T))  # tr(AB) = sum(A * B.T)
    msq = (1.0 - mean) ** 2 + var
    if return_parts:
        return msq, mean, var
    return msq


def stein_wick_q2(cov: CovarianceTable, sigma_sq: float, N: int) -> float:
    """Four-index Isserlis enumeration of ``E[(1 - T)^2]`` for ``q = 2``.

    ``E[T^2] = sum C_ij C_kl (R_ij R_kl + R_ik R_jl + R_il R_jk)``; cost
    O(N^4), meant only as an independent check at small ``N``.
    """
    if N > 96:
        raise DomainError("Wick enumeration is limited to N <= 96")
    C, R = _q2_matrices(cov, sigma_sq, N)
    ET = float(np.einsum("ij,ij->", C, R))
    ET2 = 0.0
    for i in range(N):
        # one outer index at a time keeps memory at O(N^2)
        Ci = C[i]
        Ri = R[i]
        t1 = float(Ci @ R[i]) * ET
        t2 = float(np.einsum("j,kl,k,jl->", Ci, C, Ri, R))
        t3 = float(np.einsum("j,kl,l,jk->", Ci, C, Ri, R))
        ET2 += t1 + t2 + t3
    return 1.0 - 2.0 * ET + ET2


# --------------------------------------------------------------------------
# Monte Carlo


def _mc_t_values(params: ModelParams, sim: PathSimulator, forms: Sequence[ToeplitzForm],
                 sigma_sq: float, replicate: int) -> np.ndarray:
    X = sim.path(replicate).X
    h_all = hermite_prob(params.q - 1, X)
    out = np.empty(len(forms))
    for k, form in enumerate(forms):
        N = form.n
        out[k] = _t_scale(params.q, sigma_sq, N, False) * form(h_all[:N])
    return out


def _summarize(values: np.ndarray) -> EstimateWithError:
    n = len(values)
    mean = math.fsum(values.tolist()) / n
    sd = float(np.std(values, ddof=1)) if n > 1 else float("inf")
    return EstimateWithError(mean, sd / math.sqrt(n), "stderr")


def stein_mc_sweep(params: ModelParams, cov: CovarianceTable, sigma_sq: float,
                   grid: Sequence[int], reps: int, master_seed: int,
                   threads: int = 1, M: Optional[int] = None) -> Dict[int, SteinEstimate]:
    """Monte Carlo ``E[T]`` and ``E[(1-T)^2]`` on a horizon grid.

    Every horizon uses prefixes of the same ``max(grid)`` path per
    replicate (common random numbers).  ``cov`` must describe the weights
    being simulated; ``M`` defaults to ``cov.trunc_M``.
    """
    params.require(Regime.CLT)
    if reps < 2:
        raise DomainError("reps must be >= 2")
    grid = [int(n) for n in grid]
    if min(grid) < 1:
        raise DomainError("horizons must be >= 1")
    if not cov.is_truncated:
        raise DomainError("Monte Carlo needs a truncated covariance table")
    M = cov.trunc_M if M is None else M
    if M != cov.trunc_M:
        raise DomainError("simulated truncation differs from the covariance table")
    Nmax = max(grid)
    if cov.m_max < Nmax - 1:
        raise LagRangeError(f"table has {cov.m_max + 1} lags, need {Nmax}")
    sim = PathSimulator(params, Nmax, M, master_seed, cov.weights)
    forms = [ToeplitzForm(cov.rho, N) for N in grid]
    func = partial(_mc_t_values, params, sim, forms, sigma_sq)
    T = np.array(map_replicates(func, reps, threads))
    out = {}
    for k, N in enumerate(grid):
        col = T[:, k]
        mean_T = _summarize(col)
        msq = _summarize((1.0 - col) ** 2)
        out[N] = SteinEstimate(N, reps, mean_T, msq, math.sqrt(max(msq.value, 0.0)))
    return out


def stein_msq_mc(params: ModelParams, cov: CovarianceTable, sigma_sq: float, N: int,
                 reps: int, master_seed: int, threads: int = 1) -> SteinEstimate:
    """Monte Carlo estimate of ``E[(1 - T)^2]`` at one horizon."""
    return stein_mc_sweep(params, cov, sigma_sq, [N], reps, master_seed, threads)[N]


def berry_esseen_report(params: ModelParams, grid: Sequence[int], reps: int, seed: int,
                        trunc_factor: int = DEFAULT_TRUNC_FACTOR, threads: int = 1,
                        pass_band: float = 0.1, sweep: Optional[Dict[int, SteinEstimate]] = None):
    """Fit the decay exponent of ``sqrt(E[(1-T)^2])`` over ``grid``.

    Returns ``(RateFit, sweep)``; ``sweep`` maps each horizon to its
    :class:`SteinEstimate`.  A precomputed sweep may be passed in.
    """
    info = classify_regime(params)
    params.require(Regime.CLT)
    grid = sorted(int(n) for n in grid)
    if len(grid) < 4:
        raise DomainError("a rate fit needs at least 4 horizons")
    if sweep is None:
        from .constants import sigma_qbeta

        Nmax = grid[-1]
        cov = build_table(params, trunc_factor * Nmax)
        sigma_sq = sigma_qbeta(params, cov).value
        sweep = stein_mc_sweep(params, cov, sigma_sq, grid, reps, seed, threads)
    points = [(N, sweep[N].bound) for N in grid]
    fit = fit_rate(points, theoretical_exponent=info.clt_exponent, pass_band=pass_band)
    return fit, sweep
