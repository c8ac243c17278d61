import math
import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from steinlab import ModelParams, Regime
from steinlab.constants import (CltBranch, beta_fn, c_beta, classify_regime, constant_set,
                                cov_constant, d_qbeta, h_qbeta, sigma_qbeta, zeta_2beta)
from steinlab.covariance import build_table, ideal_table
from steinlab.errors import BoundaryError, DomainError, NumericError, RegimeError


@pytest.mark.parametrize("x, y, expected", [(1, 1, 1.0), (0.5, 0.5, math.pi)])
def test_beta_fn_closed_forms(x, y, expected):
    assert beta_fn(x, y) == pytest.approx(expected, rel=1e-14)


def test_beta_fn_against_quadrature(oracles):
    assert beta_fn(0.5, 0.25) == pytest.approx(oracles["beta_fn_0.5_0.25"], rel=1e-12)
    assert beta_fn(0.5, 0.25) == pytest.approx(5.2437, abs=5e-4)


@given(st.floats(0.05, 50), st.floats(0.05, 50))
def test_beta_fn_symmetric(x, y):
    assert beta_fn(x, y) == pytest.approx(beta_fn(y, x), rel=1e-13)


def test_beta_fn_large_arguments_use_log_gamma():
    v = beta_fn(120.0, 90.0)
    ref = math.exp(math.lgamma(120) + math.lgamma(90) - math.lgamma(210))
    assert v == pytest.approx(ref, rel=1e-11)


@pytest.mark.parametrize("x, y", [(0, 1), (-1, 2), (1, 0)])
def test_beta_fn_domain(x, y):
    with pytest.raises(DomainError):
        beta_fn(x, y)


@pytest.mark.parametrize("beta", ["0.75", "0.9"])
def test_zeta_against_direct_summation(oracles, beta):
    z = zeta_2beta(float(beta))
    assert z.error <= 1e-10
    # the oracle truncates at 1e7 terms with an integral tail, good to ~1e-12
    assert abs(z.value - oracles["zeta_2beta"][beta]) <= z.error + 1e-11


def test_zeta_known_value():
    assert zeta_2beta(0.75).value == pytest.approx(2.612375348685488, rel=1e-13)


@given(st.floats(0.51, 0.99))
def test_zeta_exceeds_one(beta):
    assert zeta_2beta(beta).value > 1


@pytest.mark.parametrize("beta", ["0.6", "0.75", "0.9"])
def test_c_beta_against_quadrature(oracles, beta):
    assert c_beta(float(beta)) == pytest.approx(oracles["c_beta"][beta], rel=1e-12)


@given(st.floats(0.51, 0.99))
def test_c_beta_is_beta_fn(beta):
    assert c_beta(beta) == beta_fn(2 * beta - 1, 1 - beta)


@pytest.mark.parametrize("beta", [0.5, 1.0, 0.3, 1.2])
def test_c_beta_rejects_outside_interval(beta):
    with pytest.raises(DomainError):
        c_beta(beta)


def test_cov_constant_policy():
    p = ModelParams(2, 0.75)
    assert cov_constant(p) == pytest.approx(c_beta(0.75) / zeta_2beta(0.75).value, rel=1e-15)
    assert cov_constant(ModelParams(2, 0.75, normalize_weights=False)) == c_beta(0.75)


# -- sigma^2 -------------------------------------------------------------


def test_sigma_truncated_matches_direct_correlation(oracles):
    p = ModelParams(3, 0.9)
    s = sigma_qbeta(p, build_table(p, 16384))
    ref = oracles["sigma_trunc_q3_b0.9_M16384"]
    assert s.value > 0
    assert abs(s.value - ref) <= max(s.error, 1e-13 * ref)


def test_sigma_ideal_certified_and_brackets_truncated():
    p = ModelParams(3, 0.9)
    ideal = sigma_qbeta(p, ideal_table(p, 1024), tol=1e-4)
    assert ideal.error <= 1e-4
    assert ideal.value > 0
    # the truncated model loses long-lag covariance, so its sigma^2 is smaller
    trunc = sigma_qbeta(p, build_table(p, 1 << 16))
    assert trunc.value < ideal.upper


def test_sigma_ideal_gives_up_honestly():
    p = ModelParams(2, 0.9)
    with pytest.raises(NumericError):
        sigma_qbeta(p, ideal_table(p, 1024), tol=1e-10, max_lags=1 << 14)


def test_sigma_rejects_nclt_pair():
    p = ModelParams(2, 0.7)
    with pytest.raises(RegimeError):
        sigma_qbeta(p, build_table(p, 64))


def test_sigma_increases_with_truncation():
    p = ModelParams(2, 0.9)
    vals = [sigma_qbeta(p, build_table(p, M)).value for M in (1024, 4096, 16384)]
    assert vals[0] < vals[1] < vals[2]


# -- d, h and the regime classifier ------------------------------------------------


def test_d_instantiation():
    p = ModelParams(2, 0.7)
    c = 1.7
    d = d_qbeta(p, c)
    assert d * d * 2 * 2 * c ** 2 == pytest.approx(0.2 * 1.2, rel=1e-13)


def test_h_instantiations():
    c = 1.7
    assert h_qbeta(ModelParams(2, 0.7), c) ** 2 == pytest.approx(c ** 2 / 0.24, rel=1e-13)
    # at q = 1 the two factors are 2 - 2 beta = 0.6 and 3 - 2 beta = 1.6
    h1 = h_qbeta(ModelParams(1, 0.7), c)
    assert h1 ** 2 == pytest.approx(2 * c / (0.6 * 1.6), rel=1e-13)
    assert h1 * d_qbeta(ModelParams(1, 0.7), c) == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("func", [d_qbeta, h_qbeta])
def test_d_h_reject_clt(func):
    with pytest.raises(RegimeError):
        func(ModelParams(2, 0.9), 1.0)


def _nclt_pairs():
    out = []
    for q in (1, 2, 3, 4, 5):
        for beta in np.linspace(0.52, 0.98, 25):
            p = ModelParams(q, float(beta))
            if not p.on_boundary and p.memory < 1:
                out.append(p)
    return out


@pytest.mark.parametrize("p", _nclt_pairs(), ids=lambda p: f"q{p.q}-b{p.beta:.3f}")
def test_dh_identity(p):
    c = cov_constant(p)
    assert abs(d_qbeta(p, c) * h_qbeta(p, c) * math.factorial(p.q) - 1) <= 1e-12


def test_regime_examples():
    a = classify_regime(ModelParams(2, 0.9))
    assert a.regime is Regime.CLT and a.clt_branch is CltBranch.LOW_BETA
    assert a.clt_exponent == pytest.approx(-0.3, abs=1e-14)
    b = classify_regime(ModelParams(2, 0.7))
    assert b.regime is Regime.NCLT
    assert b.nclt_exponent == pytest.approx(-0.2, abs=1e-14)
    c = classify_regime(ModelParams(5, 0.75))
    assert c.clt_branch is CltBranch.HIGH_BETA
    assert c.branch_threshold == pytest.approx(0.625)
    assert c.clt_exponent == pytest.approx(-0.25, abs=1e-14)


def test_boundary_is_refused():
    with pytest.raises(BoundaryError):
        ModelParams(2, 0.75).regime


@pytest.mark.parametrize("q, beta", [(0, 0.7), (2, 0.5), (2, 1.0), (1.5, 0.7), (True, 0.7)])
def test_params_domain(q, beta):
    with pytest.raises(DomainError):
        ModelParams(q, beta)


def test_clt_exponent_continuous_across_branch():
    q = 3
    thr = q / (2 * q - 2)
    lo = classify_regime(ModelParams(q, thr - 1e-9)).clt_exponent
    hi = classify_regime(ModelParams(q, thr + 1e-9)).clt_exponent
    assert lo == pytest.approx(hi, abs=1e-8)


def test_constant_set_fields():
    cs = constant_set(ModelParams(2, 0.7))
    assert cs.sigma_sq is None
    assert cs.d_q_beta * cs.h_q_beta * 2 == pytest.approx(1, abs=1e-14)
    p = ModelParams(2, 0.9)
    cs = constant_set(p, build_table(p, 1024))
    assert cs.d_q_beta is None and cs.sigma_sq > 0
