"""Autocovariance of the moving average ``X_n = sum_i alpha_i eps_(n-i)``.

Two kinds of table exist:

* truncated: ``alpha_1..alpha_M`` are kept (``alpha_i = i^-beta``,
  optionally rescaled to unit sum of squares) and ``rho`` is exact for that
  finite model.  Every simulation runs against this model.
* ideal: ``M = infinity``; ``rho`` comes from the pair series with a
  certified Euler-Maclaurin tail (see :mod:`steinlab.series`).

For the truncated kind ``ideal_bias_bound[m]`` bounds
``|rho_ideal(m) - rho_M(m)|``; it uses
``sum_{i>K} i^-2beta <= K^(1-2beta) / (2 beta - 1)`` for both the lost
overlap terms and the lost normalization mass.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import scipy.fft

from .constants import ModelParams, c_beta, zeta_2beta
from .errors import DomainError, LagRangeError
from .series import pair_series


@dataclass(frozen=True, eq=False)
class CovarianceTable:
    beta: float
    normalize_weights: bool
    trunc_M: Optional[int]  # None for the ideal model
    weights: Optional[np.ndarray]
    rho: np.ndarray
    tail_bound: float
    ideal_bias_bound: np.ndarray
    norm_sq: float  # sum of unnormalized squared weights divided out (1 if none)

    @property
    def m_max(self) -> int:
        return len(self.rho) - 1

    @property
    def is_truncated(self) -> bool:
        return self.trunc_M is not None

    @property
    def covers_all_lags(self) -> bool:
        """True when every nonzero lag of the model is stored."""
        return self.is_truncated and self.m_max >= self.trunc_M - 1

    @property
    def power_law_majorant(self) -> float:
        """``kappa`` with ``rho(m) <= kappa m^(1-2beta)`` for all ``m >= 1``."""
        return c_beta(self.beta) / self.norm_sq

    @property
    def params_key(self) -> tuple:
        return (self.beta, self.normalize_weights, self.trunc_M)

    def extended(self, m_max: int) -> "CovarianceTable":
        """Same model with lags up to ``m_max`` (capped at ``M - 1``)."""
        params = ModelParams(2, self.beta, self.normalize_weights)
        if self.is_truncated:
            return build_table(params, self.trunc_M, min(m_max, self.trunc_M - 1))
        return ideal_table(params, m_max)

    def to_csv(self, path) -> None:
        write_table_csv(self, path)


def build_weights(params: ModelParams, M: int) -> np.ndarray:
    """``(i^-beta)_{i=1..M}``; rescaled to unit sum of squares by default."""
    if int(M) != M or M < 1:
        raise DomainError(f"M must be a positive integer, got {M}")
    w = np.arange(1, int(M) + 1, dtype=float) ** -params.beta
    if params.normalize_weights:
        w /= math.sqrt(math.fsum((w * w).tolist()))
    return w


def autocorrelation(weights: np.ndarray, m_max: int) -> np.ndarray:
    """``sum_i w_i w_(i+m)`` for ``m = 0..m_max`` by zero-padded FFT."""
    M = len(weights)
    m_max = min(int(m_max), M - 1)
    n = scipy.fft.next_fast_len(M + m_max + 1, real=True)
    spec = scipy.fft.rfft(weights, n)
    out = scipy.fft.irfft(spec * np.conj(spec), n)[: m_max + 1]
    return out


def _lost_mass(beta: float, K) -> np.ndarray:
    K = np.asarray(K, dtype=float)
    return K ** (1 - 2 * beta) / (2 * beta - 1)


def build_table(params: ModelParams, M: int, m_max: Optional[int] = None) -> CovarianceTable:
    """Exact covariance table of the truncated model with ``M`` weights."""
    w = build_weights(params, M)
    M = len(w)
    if m_max is None:
        m_max = M - 1
    if m_max < 0:
        raise DomainError("m_max must be >= 0")
    m_max = min(int(m_max), M - 1)
    rho = autocorrelation(w, m_max)
    rho[0] = math.fsum((w * w).tolist())
    if params.normalize_weights:
        raw = np.arange(1, M + 1, dtype=float) ** -params.beta
        norm_sq = math.fsum((raw * raw).tolist())
    else:
        norm_sq = 1.0
    m = np.arange(m_max + 1)
    lost_overlap = _lost_mass(params.beta, M - m)
    if params.normalize_weights:
        lost_norm = float(_lost_mass(params.beta, M))
        bias = np.maximum(lost_overlap / norm_sq, rho * lost_norm / norm_sq)
    else:
        bias = lost_overlap
    return CovarianceTable(params.beta, params.normalize_weights, M, w, rho,
                           float(bias.max()), bias, norm_sq)


def ideal_table(params: ModelParams, m_max: int) -> CovarianceTable:
    """Covariances of the untruncated model for lags ``0..m_max``."""
    if m_max < 0:
        raise DomainError("m_max must be >= 0")
    r, err = pair_series(params.beta, np.arange(int(m_max) + 1))
    if params.normalize_weights:
        z = zeta_2beta(params.beta)
        norm_sq = z.value
        rho = r / z.value
        err = err / z.value + rho * z.error / z.value
    else:
        norm_sq = 1.0
        rho = r
    return CovarianceTable(params.beta, params.normalize_weights, None, None,
                           rho, float(err.max()), err, norm_sq)


def rho(cov: CovarianceTable, m: int) -> float:
    """Autocovariance at lag ``|m|``.

    Truncated tables recompute the overlap sum directly from the weights
    with correctly rounded summation; ideal tables return the stored value.
    """
    m = abs(int(m))
    if m > cov.m_max:
        raise LagRangeError(f"lag {m} exceeds table range {cov.m_max}")
    if not cov.is_truncated:
        return float(cov.rho[m])
    w = cov.weights
    return math.fsum((w[: len(w) - m] * w[m:]).tolist())


def rho_asymptotic_ratio(cov: CovarianceTable, m: int, cov_const: Optional[float] = None) -> float:
    """``rho(m) m^(2 beta - 1) / cov_constant``; tends to 1 for the ideal model."""
    if m < 1:
        raise DomainError("m must be >= 1")
    if cov_const is None:
        c = c_beta(cov.beta)
        cov_const = c / zeta_2beta(cov.beta).value if cov.normalize_weights else c
    return rho(cov, m) * m ** (2 * cov.beta - 1) / cov_const


def power_sum_bound(alpha: float, n: int, tail: Optional[bool] = None) -> float:
    """Dominating value for the two power-sum estimates.

    ``tail=False`` (default for ``alpha >= -1``): ``1 + n^(alpha+1)``, which
    dominates ``sum_{k<n} k^alpha`` up to a constant.  ``tail=True``
    (default for ``alpha < -1``): ``n^(alpha+1) / (-alpha - 1)``, which
    dominates ``sum_{k>=n} k^alpha``.
    """
    if n < 2:
        raise DomainError("n must be >= 2")
    if tail is None:
        tail = alpha < -1
    if tail:
        if alpha >= -1:
            raise DomainError("tail variant needs alpha < -1")
        return n ** (alpha + 1) / (-alpha - 1)
    return 1.0 + n ** (alpha + 1)


def toeplitz_matrix(rho_values: np.ndarray, n: int) -> np.ndarray:
    """Dense ``(rho(|i-j|))_{i,j<n}``."""
    from scipy.linalg import toeplitz

    if n > len(rho_values):
        raise LagRangeError(f"need {n} lags, table has {len(rho_values)}")
    return toeplitz(rho_values[:n])


TABLE_HEADER = ("m", "rho", "ideal_bias_bound")


def table_to_csv(cov: CovarianceTable) -> str:
    """CSV text with columns ``m, rho, ideal_bias_bound`` (17 significant digits)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TABLE_HEADER)
    for m, (r, b) in enumerate(zip(cov.rho.tolist(), cov.ideal_bias_bound.tolist())):
        writer.writerow((m, format(r, ".17g"), format(b, ".17g")))
    return buf.getvalue()


def write_table_csv(cov: CovarianceTable, path) -> None:
    Path(path).write_text(table_to_csv(cov))
