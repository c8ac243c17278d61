import json
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

FIXTURES = Path(__file__).parent / "fixtures"

settings.register_profile("steinlab", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("steinlab")


@pytest.fixture(scope="session")
def oracles():
    """Reference values produced by ``fixtures/make_oracles.py``."""
    return json.loads((FIXTURES / "oracles.json").read_text())


@pytest.fixture
def cache_env(tmp_path, monkeypatch):
    monkeypatch.setenv("STEINLAB_CACHE_DIR", str(tmp_path / "cache"))
    return tmp_path / "cache"


@pytest.fixture(scope="session")
def clt_q3_sample():
    """S_N for q=3, beta=0.9, N=4096 over 10^4 replicates at M = 16 N.

    Shared by the variance check and the KS acceptance criterion.
    """
    import math

    from steinlab import ModelParams
    from steinlab.constants import sigma_qbeta
    from steinlab.covariance import build_table
    from steinlab.paths import s_n_sample
    from steinlab.stein import mean_T_exact

    p = ModelParams(3, 0.9)
    N, M = 4096, 16 * 4096
    cov = build_table(p, M)
    sig = sigma_qbeta(p, cov).value
    s = s_n_sample(p, N, M, 10_000, master_seed=11, weights=cov.weights)
    return {"params": p, "N": N, "M": M, "sigma_sq": sig, "s": s,
            "var_ratio_exact": mean_T_exact(p, cov, sig, N)}


ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: int(k.split("-")[1])):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
