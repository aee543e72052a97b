import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from tftboot.engine import SchemeConfig, draw_rng
from tftboot.inference import (
    bootstrap_pvalue,
    changepoint_bootstrap_test,
    cusum_statistic,
    estimate_changepoint,
    mu_limit_cdf,
    read_replicates_csv,
    rho_hat,
    simulate_mu_limit,
    sup_brownian_bridge_cdf,
    sup_brownian_bridge_quantile,
    unit_root_bootstrap_test,
    unit_root_statistics,
    weighted_cusum,
    write_replicates_csv,
)
from tftboot.spectral import Kernel, ZeroVarianceError, flat_top_long_run_variance

RB = SchemeConfig("RB", Kernel("bpk", 0.01), seed=1)


def test_cusum_examples():
    assert cusum_statistic([1, 1, 3, 3]) == pytest.approx(1.0)
    assert cusum_statistic(np.full(10, 4.2)) == pytest.approx(0.0, abs=1e-12)
    v = np.random.default_rng(0).standard_normal(30)
    assert cusum_statistic(v + 7) == pytest.approx(cusum_statistic(v), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.floats(-50, 50).filter(lambda c: abs(c) > 1e-3), st.floats(-100, 100))
def test_cusum_invariances(seed, c, shift):
    v = draw_rng(seed).standard_normal(40)
    base = cusum_statistic(v)
    assert cusum_statistic(v + shift) == pytest.approx(base, rel=1e-9, abs=1e-9)
    assert cusum_statistic(c * v) == pytest.approx(abs(c) * base, rel=1e-9)
    _, _, _, z = estimate_changepoint(v)
    _, _, _, zc = estimate_changepoint(c * v)
    stud = base / np.sqrt(flat_top_long_run_variance(z))
    stud_c = cusum_statistic(c * v) / np.sqrt(flat_top_long_run_variance(zc))
    assert stud_c == pytest.approx(stud, rel=1e-10)


def test_weighted_cusum_examples():
    v = np.random.default_rng(1).standard_normal(25)
    assert weighted_cusum(v, "type1", 0.0) == pytest.approx(cusum_statistic(v), rel=1e-12)
    assert weighted_cusum(np.full(8, 2.0), "type1", 0.25) == pytest.approx(0.0, abs=1e-12)
    assert weighted_cusum(np.full(8, 2.0), "type2", 1.0) == pytest.approx(0.0, abs=1e-12)
    assert weighted_cusum([1, 1, 3, 3], "type2", 0.0) == pytest.approx(0.375)
    with pytest.raises(ValueError):
        weighted_cusum(v, "type1", 0.5)
    with pytest.raises(ValueError):
        weighted_cusum(v, "type2", 2.0)


def test_changepoint_estimate_examples():
    k, mu1, mu2, z = estimate_changepoint([1, 1, 3, 3])
    assert (k, mu1, mu2) == (2, 1.0, 3.0)
    np.testing.assert_array_equal(z, 0)
    v = np.random.default_rng(2).standard_normal(60)
    k, _, _, z = estimate_changepoint(v)
    assert 1 <= k <= 59
    assert z[:k].mean() == pytest.approx(0, abs=1e-12)
    assert z[k:].mean() == pytest.approx(0, abs=1e-12)
    # partial sums (1, 0, 1): tie between k = 1 and k = 3
    assert estimate_changepoint([1.0, -1.0, 1.0, -1.0])[0] == 1
    assert estimate_changepoint(v.copy())[0] == estimate_changepoint(v.copy())[0]


def test_bridge_cdf_matches_kolmogorov_law():
    x = np.linspace(0.05, 3.0, 120)
    np.testing.assert_allclose(sup_brownian_bridge_cdf(x), stats.kstwobign.cdf(x), atol=1e-10)
    assert sup_brownian_bridge_cdf(0.0) == 0.0
    assert 1 - sup_brownian_bridge_cdf(5.0) < 1e-10
    assert np.all(np.diff(sup_brownian_bridge_cdf(np.linspace(0, 4, 400))) >= 0)
    assert sup_brownian_bridge_quantile(0.95) == pytest.approx(1.358, abs=1e-3)


def test_bootstrap_pvalue_rule():
    reps = np.arange(1.0, 100.0)
    assert bootstrap_pvalue(1000.0, reps) == pytest.approx(1 / 100)
    assert bootstrap_pvalue(-1.0, reps) == 1.0
    assert bootstrap_pvalue(50.0, reps, "lower") == pytest.approx(51 / 100)


def test_changepoint_test_result():
    v = np.random.default_rng(3).standard_normal(120)
    res = changepoint_bootstrap_test(v, SchemeConfig("WB", Kernel("bpk", 0.2), seed=4), B=199)
    assert 1 / 200 <= res.pvalue <= 1
    assert 0 <= res.asymptotic_pvalue <= 1
    assert res.B == 199 and res.replicates.shape == (199,)
    assert res.studentized == pytest.approx(res.statistic / np.sqrt(res.tau2))
    again = changepoint_bootstrap_test(v, SchemeConfig("WB", Kernel("bpk", 0.2), seed=4), B=199)
    np.testing.assert_array_equal(again.replicates, res.replicates)


def test_changepoint_test_errors():
    with pytest.raises(ZeroVarianceError):
        changepoint_bootstrap_test(np.zeros(50), RB, B=99)
    v = np.random.default_rng(4).standard_normal(50)
    with pytest.raises(ValueError):
        changepoint_bootstrap_test(v, RB, B=50)
    with pytest.raises(ValueError):
        changepoint_bootstrap_test(v, SchemeConfig("SURROGATE"), B=99)


def test_rho_hat_examples():
    assert rho_hat([0, 1, 2, 3]) == pytest.approx(1.6)
    assert unit_root_statistics([0, 1, 2, 3], 1.0).U == pytest.approx(1.8)
    y = np.cumsum(np.random.default_rng(5).standard_normal(40))
    assert rho_hat(3.5 * y) == pytest.approx(rho_hat(y), rel=1e-12)
    a = 0.7
    assert rho_hat(np.concatenate(([0.0], a ** np.arange(10)))) == pytest.approx(a, rel=1e-12)
    with pytest.raises(ValueError):
        rho_hat([0.0, 0.0, 0.0, 1.0])


def test_unit_root_statistics_examples():
    s = unit_root_statistics([0, 1, 2, 3], 1.0)
    assert s.MU == pytest.approx(1.8)
    assert s.MSB == pytest.approx(np.sqrt(5 / 9))
    assert s.product == pytest.approx(s.MU * s.MSB)
    y = np.cumsum(np.random.default_rng(6).standard_normal(50))
    base = unit_root_statistics(y, 1.3)
    scaled = unit_root_statistics(2.5 * y, 1.3 * 2.5**2)
    assert scaled.MU == pytest.approx(base.MU, rel=1e-12)
    assert scaled.MSB == pytest.approx(base.MSB, rel=1e-12)
    with pytest.raises(ValueError):
        unit_root_statistics([0.0, 0.0, 0.0, 5.0], 1.0)


def test_unit_root_test_result():
    y = np.concatenate(([0.0], np.cumsum(np.random.default_rng(7).standard_normal(100))))
    res = unit_root_bootstrap_test(y, RB, B=199)
    assert set(res.pvalues) == {"U", "MU", "MSB", "product"}
    assert all(1 / 200 <= p <= 1 for p in res.pvalues.values())
    assert res.replicates.shape == (199, 4)
    assert res.statistics.MSB >= 0
    np.testing.assert_allclose(res.residuals, y[1:] - res.rho_hat * y[:-1])
    with pytest.raises(ValueError):
        unit_root_bootstrap_test(y, RB, B=199, mean_convention="other")


def test_mu_statistic_matches_limit_law():
    T = 512
    rng = draw_rng(13)
    mu = []
    for _ in range(2000):
        y = np.concatenate(([0.0], np.cumsum(rng.standard_normal(T))))
        mu.append(unit_root_statistics(y, 1.0).MU)
    limit = simulate_mu_limit(20_000, 1024, draw_rng(14))
    assert stats.ks_2samp(mu, limit).statistic < 0.06


def test_mu_limit_table():
    assert mu_limit_cdf(-1e6) == 0.0 and mu_limit_cdf(1e6) == 1.0
    assert mu_limit_cdf(-8.05) == pytest.approx(0.05, abs=0.003)
    draws = simulate_mu_limit(20_000, 512, draw_rng(15))
    assert np.mean(draws <= -8.05) == pytest.approx(0.05, abs=0.006)


def test_replicate_csv_round_trip(tmp_path):
    v = np.random.default_rng(8).standard_normal(80)
    res = changepoint_bootstrap_test(v, SchemeConfig("WB", Kernel("bpk", 0.3), seed=2), B=99)
    path = tmp_path / "r.csv"
    write_replicates_csv(res.replicate_rows(), path)
    rows, summary = read_replicates_csv(path)
    assert len(rows) == 99
    np.testing.assert_array_equal([r[1] for r in rows], res.replicates)
    assert summary == (res.statistic, np.sqrt(res.tau2))
    buf = io.StringIO()
    write_replicates_csv(res.replicate_rows(), buf)
    assert buf.getvalue() == path.read_text()
    assert buf.getvalue().splitlines()[0] == "replicate,statistic,studentizer"


@pytest.mark.slow
def test_changepoint_pvalues_uniform_under_null():
    p = [
        changepoint_bootstrap_test(draw_rng(100, r).standard_normal(200), SchemeConfig("RB", Kernel(), seed=1, replicate=r), 199).pvalue
        for r in range(500)
    ]
    assert stats.kstest(p, "uniform").statistic < 0.08


@pytest.mark.slow
def test_unit_root_pvalues_uniform_under_null():
    p = []
    for r in range(500):
        y = np.concatenate(([0.0], np.cumsum(draw_rng(200, r).standard_normal(200))))
        p.append(unit_root_bootstrap_test(y, SchemeConfig("RB", Kernel(), seed=1, replicate=r), 199).pvalue)
    assert stats.kstest(p, "uniform").statistic < 0.08


@pytest.mark.slow
def test_changepoint_size_iid_noise():
    from tftboot.simlab import ProcessSpec, simulate_pvalues

    p = simulate_pvalues(ProcessSpec("ar1", a=0.0), 200, "cpt", SchemeConfig("RB", Kernel("bpk", 0.01)), 500, 500, seed=21)
    assert 0.025 <= np.mean(p <= 0.05) <= 0.085
