import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from steinlab import ModelParams
from steinlab.constants import cov_constant
from steinlab.covariance import (TABLE_HEADER, autocorrelation, build_table, build_weights,
                                 ideal_table, power_sum_bound, rho, rho_asymptotic_ratio,
                                 table_to_csv, toeplitz_matrix, write_table_csv)
from steinlab.errors import DomainError, LagRangeError
from steinlab.series import pair_series


def test_single_weight():
    assert build_weights(ModelParams(2, 0.8), 1).tolist() == [1.0]


def test_unnormalized_weights():
    w = build_weights(ModelParams(2, 0.75, normalize_weights=False), 4)
    np.testing.assert_allclose(w, [1, 2 ** -0.75, 3 ** -0.75, 4 ** -0.75], rtol=1e-15)


@given(st.floats(0.51, 0.99), st.integers(1, 5000))
def test_normalized_weights_unit_norm(beta, M):
    w = build_weights(ModelParams(2, beta), M)
    assert abs(math.fsum((w * w).tolist()) - 1) <= 1e-15


def test_rho_zero_and_hand_sum():
    p = ModelParams(2, 0.75)
    assert rho(build_table(p, 1000), 0) == pytest.approx(1.0, abs=1e-15)
    t = build_table(ModelParams(2, 0.75, normalize_weights=False), 2)
    assert rho(t, 1) == pytest.approx(2 ** -0.75, rel=1e-15)
    assert rho(t, -1) == rho(t, 1)


def test_rho_out_of_range():
    t = build_table(ModelParams(2, 0.75), 10)
    with pytest.raises(LagRangeError):
        rho(t, 10)


def test_fft_table_matches_direct_correlation():
    p = ModelParams(2, 0.8)
    t = build_table(p, 3000)
    w = t.weights
    direct = np.correlate(w, w, "full")[len(w) - 1:]
    np.testing.assert_allclose(t.rho, direct, rtol=0, atol=1e-14)
    for m in (0, 1, 17, 2999):
        assert rho(t, m) == pytest.approx(t.rho[m], abs=1e-15)


def test_truncated_table_is_psd():
    t = build_table(ModelParams(2, 0.7), 512)
    eig = np.linalg.eigvalsh(toeplitz_matrix(t.rho, 256))
    assert eig.min() > -1e-12


def test_ideal_table_brackets_truncated():
    p = ModelParams(2, 0.75, normalize_weights=False)
    ideal = ideal_table(p, 100)
    trunc = build_table(p, 20000, 100)
    assert np.all(trunc.rho < ideal.rho)
    assert np.all(ideal.rho - trunc.rho <= trunc.ideal_bias_bound + ideal.ideal_bias_bound)


def test_ideal_ratio_at_large_lag(oracles):
    # the oracle is an arbitrary-precision Euler-Maclaurin sum
    ref = oracles["ideal_ratio_1e5"]
    for beta in ("0.6", "0.75", "0.9"):
        p = ModelParams(2, float(beta), normalize_weights=False)
        got = rho_asymptotic_ratio(ideal_table(p, 10 ** 5), 10 ** 5)
        assert got == pytest.approx(ref[beta], rel=1e-9)
    assert abs(ref["0.75"] - 1) <= 0.05


def test_ratio_monotone_on_decade_grid():
    p = ModelParams(2, 0.75)
    lags = [10, 100, 1000, 10 ** 4, 10 ** 5, 10 ** 6]
    r, _ = pair_series(0.75, np.array(lags))
    ratios = r * np.array(lags, float) ** 0.5 / cov_constant(ModelParams(2, 0.75, False))
    assert np.all(np.diff(ratios) > 0) and ratios[-1] < 1
    t = build_table(p, 64)
    assert 0 < rho_asymptotic_ratio(t, 1) < math.inf


def test_power_sum_bound_examples():
    assert sum(k ** 0 for k in range(1, 10)) <= power_sum_bound(0, 10) == 11
    tail = math.fsum(k ** -2.0 for k in range(10, 10 ** 6)) + 1e-6
    assert tail == pytest.approx(0.10516, abs=1e-5)
    assert power_sum_bound(-2, 10) == pytest.approx(0.1)


@pytest.mark.parametrize("alpha", [-1.5, -2.0, -3.0])
def test_power_sum_tail_ratio_bounded(alpha):
    n = np.arange(2, 10 ** 4 + 1)
    k = np.arange(1, 2 * 10 ** 6, dtype=float) ** alpha
    tails = np.cumsum(k[::-1])[::-1]  # tails[j] = sum_{k >= j+1}
    ratios = tails[n - 1] / np.array([power_sum_bound(alpha, int(x)) for x in n])
    assert np.isfinite(ratios).all()
    assert ratios.max() <= 3


@pytest.mark.parametrize("alpha", [-0.9, -0.5, 0.0, 1.0])
def test_power_sum_head_ratio_bounded(alpha):
    n = np.arange(2, 10 ** 4 + 1)
    heads = np.cumsum(np.arange(1, 10 ** 4, dtype=float) ** alpha)
    ratios = heads[n - 2] / np.array([power_sum_bound(alpha, int(x)) for x in n])
    assert ratios.max() <= 1 / (alpha + 1) + 1


def test_power_sum_bound_domain():
    with pytest.raises(DomainError):
        power_sum_bound(-0.5, 10, tail=True)
    with pytest.raises(DomainError):
        power_sum_bound(-2, 1)


def test_table_csv(tmp_path):
    t = build_table(ModelParams(2, 0.8), 8)
    text = table_to_csv(t)
    lines = text.splitlines()
    assert lines[0] == ",".join(TABLE_HEADER)
    assert len(lines) == 9
    out = tmp_path / "t.csv"
    write_table_csv(t, out)
    assert out.read_text() == text


def test_autocorrelation_caps_lags():
    assert len(autocorrelation(np.ones(5), 100)) == 5
