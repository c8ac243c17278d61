import math

import numpy as np
import pytest

from steinlab import ModelParams
from steinlab.constants import sigma_qbeta
from steinlab.covariance import build_table
from steinlab.errors import DomainError, LagRangeError, RegimeError
from steinlab.hermite import hermite_prob
from steinlab.paths import PathBatch, PathConfig, PathSimulator, simulate_path
from steinlab.stein import (DistanceKind, ToeplitzForm, berry_esseen_report, mean_T_exact,
                            stein_exact_q2, stein_mc_sweep, stein_T, stein_wick_q2,
                            toeplitz_form, toeplitz_form_direct, toeplitz_form_fft)


@pytest.fixture(scope="module")
def q2_table():
    p = ModelParams(2, 0.9)
    cov = build_table(p, 4096)
    return p, cov, sigma_qbeta(p, cov).value


def test_form_direct_vs_fft_q3():
    p = ModelParams(3, 0.9)
    cov = build_table(p, 4096)
    X = simulate_path(p, PathConfig(1024, 4096, 3)).X
    h = hermite_prob(2, X)
    a = toeplitz_form_direct(cov.rho, h)
    b = toeplitz_form_fft(cov.rho, h)
    assert abs(a - b) <= 1e-9 * max(1.0, abs(a))
    T_d = stein_T(p, cov, PathBatch(X, PathConfig(1024, 4096), 0.0), 1.0, method="direct")
    T_f = stein_T(p, cov, PathBatch(X, PathConfig(1024, 4096), 0.0), 1.0, method="fft")
    assert T_d == pytest.approx(T_f, rel=1e-9)


@pytest.mark.parametrize("n", [1, 7, 255, 256, 300])
def test_toeplitz_form_object_matches_dense(n):
    rho = build_table(ModelParams(2, 0.8), 512).rho
    h = np.sin(np.arange(n) * 0.37)
    assert ToeplitzForm(rho, n)(h) == pytest.approx(toeplitz_form_direct(rho, h), rel=1e-10)


def test_form_with_ones_is_the_lag_sum():
    # with He_0 = 1 the quadratic form collapses to sum_{k,l} rho(k - l)
    rho = build_table(ModelParams(2, 0.8), 256).rho
    n = 100
    lag_sum = n * rho[0] + 2 * sum((n - m) * rho[m] for m in range(1, n))
    assert toeplitz_form(rho, np.ones(n)) == pytest.approx(lag_sum, rel=1e-12)


def test_stein_T_needs_central_regime():
    p = ModelParams(1, 0.8)
    cov = build_table(p, 64)
    batch = simulate_path(p, PathConfig(16, 64))
    with pytest.raises(RegimeError):
        stein_T(p, cov, batch, 1.0)


def test_stein_T_lag_range(q2_table):
    p, _, sig = q2_table
    short = build_table(p, 32)
    batch = simulate_path(p, PathConfig(64, 4096))
    with pytest.raises(LagRangeError):
        stein_T(p, short, batch, sig)


def test_uncorrected_factor(q2_table):
    p, cov, sig = q2_table
    batch = simulate_path(p, PathConfig(64, 4096, 1))
    assert stein_T(p, cov, batch, sig, uncorrected=True) == pytest.approx(
        4 * stein_T(p, cov, batch, sig), rel=1e-14)


def test_mean_T_single_term(q2_table):
    p, cov, sig = q2_table
    assert mean_T_exact(p, cov, sig, 1) == pytest.approx(1 / (sig * 2), rel=1e-15)


def test_mean_T_sweep_fixture(oracles):
    ref = oracles["mean_T_q2_b0.9_M65536"]
    p = ModelParams(2, 0.9)
    cov = build_table(p, 65536)
    sig = sigma_qbeta(p, cov).value
    assert sig == pytest.approx(ref["sigma_sq"], rel=1e-12)
    vals = []
    for N_str, v in sorted(ref["mean_T"].items(), key=lambda kv: int(kv[0])):
        N = int(N_str)
        got = mean_T_exact(p, cov, sig, N)
        assert got == pytest.approx(v, rel=1e-11)
        vals.append((N, got))
    scaled = [(1 - v) * N ** 0.6 for N, v in vals]
    assert max(scaled) / min(scaled) < 2  # bounded, no drift in N
    assert all(a < b < 1 for (_, a), (_, b) in zip(vals, vals[1:]))


def test_exact_q2_single_observation(q2_table):
    _, cov, sig = q2_table
    msq, mean, var = stein_exact_q2(cov, sig, 1, return_parts=True)
    assert mean == pytest.approx(1 / (2 * sig), rel=1e-15)
    assert var == pytest.approx(2 * (1 / (2 * sig)) ** 2, rel=1e-14)
    assert msq == pytest.approx((1 - mean) ** 2 + var, rel=1e-15)


@pytest.mark.parametrize("N", [16, 64])
def test_trace_against_wick_fixture(oracles, q2_table, N):
    p, cov, sig = q2_table
    ref = oracles["wick_q2_b0.9_M4096"][str(N)]
    assert sig == pytest.approx(ref["sigma_sq"], rel=1e-13)
    trace = stein_exact_q2(cov, sig, N)
    assert abs(trace - ref["msq"]) <= 1e-12 * ref["msq"] + 1e-13
    assert abs(stein_wick_q2(cov, sig, N) - trace) <= 1e-12
    _, mean, _ = stein_exact_q2(cov, sig, N, return_parts=True)
    assert abs(mean - mean_T_exact(p, cov, sig, N)) <= 1e-12


def test_wick_size_limit(q2_table):
    _, cov, sig = q2_table
    with pytest.raises(DomainError):
        stein_wick_q2(cov, sig, 97)


def test_exact_msq_decreases():
    p = ModelParams(2, 0.9)
    cov = build_table(p, 65536)
    sig = sigma_qbeta(p, cov).value
    vals = [stein_exact_q2(cov, sig, N) for N in (256, 512, 1024, 2048)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_mc_mean_T_small(q2_table):
    p, cov, sig = q2_table
    est = stein_mc_sweep(p, cov, sig, [64, 128], 1500, master_seed=8)
    for N in (64, 128):
        m = est[N].mean_T
        assert abs(m.value - mean_T_exact(p, cov, sig, N)) <= 4 * m.error


def test_mc_msq_small(q2_table):
    p, cov, sig = q2_table
    est = stein_mc_sweep(p, cov, sig, [32], 4000, master_seed=9)[32]
    exact = stein_exact_q2(cov, sig, 32)
    assert abs(est.msq.value - exact) <= 4 * est.msq.error


def test_common_random_numbers_reproducible(q2_table):
    p, cov, sig = q2_table
    a = stein_mc_sweep(p, cov, sig, [32, 64], 20, master_seed=1)
    b = stein_mc_sweep(p, cov, sig, [64, 32], 20, master_seed=1)
    assert a[32] == b[32] and a[64] == b[64]


def test_mc_guards(q2_table):
    p, cov, sig = q2_table
    with pytest.raises(DomainError):
        stein_mc_sweep(p, cov, sig, [32], 1, 0)
    with pytest.raises(LagRangeError):
        stein_mc_sweep(p, build_table(p, 16), sig, [32], 10, 0)


def test_distance_constants():
    assert [k.constant for k in DistanceKind] == [1, 1, 2, 4]


def test_bound_for_kolmogorov_is_root_msq(q2_table):
    p, cov, sig = q2_table
    est = stein_mc_sweep(p, cov, sig, [32], 50, master_seed=2)[32]
    assert est.bound == math.sqrt(est.msq.value)
    assert est.for_distance(DistanceKind.TOTAL_VARIATION).bound == 2 * est.bound


def test_rate_report_attaches_high_beta_exponent():
    p = ModelParams(5, 0.75)
    fit, sweep = berry_esseen_report(p, [16, 32, 64, 128], reps=40, seed=0, trunc_factor=8)
    assert fit.theoretical_exponent == pytest.approx(-0.25)
    assert set(sweep) == {16, 32, 64, 128}


def test_rate_report_needs_several_points():
    with pytest.raises(DomainError):
        berry_esseen_report(ModelParams(2, 0.9), [64], reps=10, seed=0)
