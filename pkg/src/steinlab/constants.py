"""Model parameters, regime classification and closed-form constants.

Conventions
-----------
``c_beta`` is ``B(2 beta - 1, 1 - beta)``, the constant in
``rho(m) ~ c m^(1 - 2 beta)`` for weights ``i^-beta``.  With the default
weight policy the weights are divided by ``sqrt(zeta(2 beta))`` so that
``rho(0) = 1``; the asymptotic constant then becomes
``c_beta / zeta(2 beta)`` and that is what :attr:`ConstantSet.cov_constant`
holds.  ``d`` and ``h`` take the covariance constant as an explicit
argument so callers choose the policy.

The constant ``h`` uses the factor ``(-2 beta q + q + 2)``.  This is the
factor that makes ``d * h * q! = 1`` hold exactly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

from .errors import BoundaryError, DomainError, NumericError, RegimeError
from .series import DEFAULT_HEAD, pair_series_tail

if TYPE_CHECKING:
    from .covariance import CovarianceTable

_BOUNDARY_TOL = 1e-12


class Regime(str, enum.Enum):
    CLT = "CLT"
    NCLT = "NCLT"


class CltBranch(str, enum.Enum):
    LOW_BETA = "low_beta"
    HIGH_BETA = "high_beta"


@dataclass(frozen=True)
class ModelParams:
    """Hermite rank ``q``, memory exponent ``beta`` and the weight policy."""

    q: int
    beta: float
    normalize_weights: bool = True

    def __post_init__(self):
        if isinstance(self.q, bool) or int(self.q) != self.q:
            raise DomainError(f"q must be an integer, got {self.q!r}")
        object.__setattr__(self, "q", int(self.q))
        object.__setattr__(self, "beta", float(self.beta))
        if self.q < 1:
            raise DomainError(f"q must be >= 1, got {self.q}")
        if not (0.5 < self.beta < 1.0):
            raise DomainError(f"beta must lie in (1/2, 1), got {self.beta}")

    @property
    def memory(self) -> float:
        """``q (2 beta - 1)``; the regime boundary sits at 1."""
        return self.q * (2 * self.beta - 1)

    @property
    def on_boundary(self) -> bool:
        return abs(self.memory - 1.0) <= _BOUNDARY_TOL

    @property
    def regime(self) -> Regime:
        if self.on_boundary:
            raise BoundaryError(
                f"q(2beta-1) = 1 for q={self.q}, beta={self.beta}: no regime")
        return Regime.CLT if self.memory > 1 else Regime.NCLT

    def require(self, regime: Regime) -> None:
        """Raise :class:`RegimeError` unless the parameters are in ``regime``."""
        actual = self.regime
        if actual is not regime:
            raise RegimeError(
                f"(q={self.q}, beta={self.beta}) is in the {actual.value} "
                f"regime, operation needs {regime.value}")


@dataclass(frozen=True)
class EstimateWithError:
    """A scalar with either a Monte Carlo standard error or a hard bound."""

    value: float
    error: float
    kind: str = "bound"  # "bound" or "stderr"

    @property
    def lower(self) -> float:
        return self.value - self.error

    @property
    def upper(self) -> float:
        return self.value + self.error


@dataclass(frozen=True)
class RegimeInfo:
    regime: Regime
    clt_exponent: Optional[float]
    clt_branch: Optional[CltBranch]
    nclt_exponent: Optional[float]
    threshold_q_inverse: float
    branch_threshold: Optional[float]


@dataclass(frozen=True)
class ConstantSet:
    c_beta: float
    zeta_2beta: float
    cov_constant: float
    sigma_sq: Optional[float]
    d_q_beta: Optional[float]
    h_q_beta: Optional[float]


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not (0.5 < beta < 1.0):
        raise DomainError(f"beta must lie in (1/2, 1), got {beta}")
    return beta


def beta_fn(x: float, y: float) -> float:
    """Euler beta function ``Gamma(x) Gamma(y) / Gamma(x + y)``.

    Uses the C library gamma (correctly rounded to a few ulp) when the
    result cannot overflow, and ``lgamma`` otherwise.
    """
    if not (x > 0 and y > 0):
        raise DomainError(f"beta_fn needs positive arguments, got ({x}, {y})")
    if x + y < 170.0:
        return math.gamma(x) * math.gamma(y) / math.gamma(x + y)
    return math.exp(math.lgamma(x) + math.lgamma(y) - math.lgamma(x + y))


def zeta_2beta(beta: float, head: int = DEFAULT_HEAD) -> EstimateWithError:
    """``sum_{i>=1} i^(-2 beta)`` with a certified error bound."""
    beta = _check_beta(beta)
    direct = math.fsum(i ** (-2 * beta) for i in range(1, head))
    tail, bound = pair_series_tail(beta, [0], head)
    value = direct + float(tail[0])
    err = float(bound[0]) + 4 * head * 2.0 ** -53 * value
    return EstimateWithError(value, err)


def c_beta(beta: float) -> float:
    """``B(2 beta - 1, 1 - beta) = int_0^inf y^-beta (1+y)^-beta dy``."""
    beta = _check_beta(beta)
    return beta_fn(2 * beta - 1, 1 - beta)


def cov_constant(params: ModelParams) -> float:
    """Asymptotic constant of ``rho(m) m^(2 beta - 1)`` under the weight policy."""
    c = c_beta(params.beta)
    if params.normalize_weights:
        return c / zeta_2beta(params.beta).value
    return c


def classify_regime(params: ModelParams) -> RegimeInfo:
    q, beta = params.q, params.beta
    regime = params.regime
    thr_q = 1.0 / (2 * beta - 1)
    branch_thr = q / (2 * q - 2) if q > 1 else None
    if regime is Regime.CLT:
        low = q / 2 + 0.5 - q * beta
        high = 0.5 - beta
        branch = CltBranch.LOW_BETA if beta <= branch_thr else CltBranch.HIGH_BETA
        return RegimeInfo(regime, max(low, high), branch, None, thr_q, branch_thr)
    return RegimeInfo(regime, None, None, 2 * beta * q - q - 1, thr_q, branch_thr)


def _nclt_factors(params: ModelParams) -> float:
    params.require(Regime.NCLT)
    q, beta = params.q, params.beta
    first = -2 * beta * q + q + 1
    second = -2 * beta * q + q + 2
    return first * second


def d_qbeta(params: ModelParams, cov_const: float) -> float:
    """Normalizing constant of the Hermite random variable."""
    prod = _nclt_factors(params)
    q = params.q
    return math.sqrt(prod / (2 * math.factorial(q) * cov_const ** q))


def h_qbeta(params: ModelParams, cov_const: float) -> float:
    """Renormalization constant of the non-central limit."""
    prod = _nclt_factors(params)
    q = params.q
    return math.sqrt(2 * cov_const ** q / (math.factorial(q) * prod))


def sigma_qbeta(params: ModelParams, cov: "CovarianceTable",
                tol: float = 1e-10, max_lags: int = 1 << 22) -> EstimateWithError:
    """Limiting variance ``(1/q!) sum_m rho(m)^q`` of ``S_N / sqrt(N)``.

    For a truncated table the series is finite and is summed exactly over
    all ``M`` lags.  For the ideal model the table is extended (doubling
    the lag count) until the power-law majorant of the tail is below
    ``tol``; :class:`NumericError` is raised if that needs more than
    ``max_lags`` lags.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    params.require(Regime.CLT)
    q = params.q
    fact = math.factorial(q)
    p = q * (2 * params.beta - 1)
    table = cov
    while True:
        rho = table.rho
        body = (rho[0] ** q + 2 * math.fsum((rho[1:] ** q).tolist())) / fact
        if table.covers_all_lags:
            err = 8 * 2.0 ** -53 * body * math.log2(max(len(rho), 2))
            return EstimateWithError(body, err)
        k = table.m_max
        # rho(m) <= kappa m^(1 - 2 beta) for every m >= 1
        majorant = table.power_law_majorant ** q * k ** (1 - p) / (p - 1)
        half = majorant / fact  # tail in [0, 2 majorant / q!]
        if half <= tol:
            return EstimateWithError(body + half, half)
        if 2 * k > max_lags:
            raise NumericError(
                f"sigma^2 tail bound {half:.3g} > tol={tol:g} at {k} lags")
        table = table.extended(2 * k)


def constant_set(params: ModelParams, cov: "CovarianceTable | None" = None,
                 tol: float = 1e-10) -> ConstantSet:
    """All constants for ``params``; regime-specific ones are ``None`` elsewhere."""
    c = c_beta(params.beta)
    z = zeta_2beta(params.beta).value
    kappa = c / z if params.normalize_weights else c
    sigma_sq = d = h = None
    if params.regime is Regime.CLT:
        if cov is not None:
            sigma_sq = sigma_qbeta(params, cov, tol).value
    else:
        d = d_qbeta(params, kappa)
        h = h_qbeta(params, kappa)
    return ConstantSet(c, z, kappa, sigma_sq, d, h)
