import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tftboot.engine import SchemeConfig, draw_rng
from tftboot.simlab import (
    ASPCurve,
    ProcessSpec,
    asp_curve,
    emit_asp_csv,
    generate,
    innovations,
    parse_experiment,
    read_asp_csv,
    run_asp,
    simulate_pvalues,
)
from tftboot.spectral import Kernel


def test_ar1_with_zero_coefficient_is_innovations():
    spec = ProcessSpec("ar1", a=0.0, innovation="centered-exponential")
    np.testing.assert_array_equal(generate(spec, 50, draw_rng(3)), innovations(spec.innovation, 50, draw_rng(3)))


def test_garch_without_dynamics():
    spec = ProcessSpec("garch11", omega=0.4, alpha=0.0, beta=0.0)
    rng = draw_rng(4)
    e = innovations("standard-normal", 60 + 512, draw_rng(4))
    np.testing.assert_allclose(generate(spec, 60, rng), np.sqrt(0.4) * e[512:], rtol=1e-15)


def test_centered_exponential_moments():
    e = innovations("centered-exponential", 1_000_000, draw_rng(5))
    assert abs(e.mean()) < 0.005
    assert e.var() == pytest.approx(1.0, rel=0.01)


def test_generator_deterministic():
    for spec in (ProcessSpec("ar1", a=0.5), ProcessSpec("garch11"), ProcessSpec("randomwalk", rho=0.95)):
        np.testing.assert_array_equal(generate(spec, 100, draw_rng(1)), generate(spec, 100, draw_rng(1)))


def test_ar1_recursion_and_burn_in():
    spec = ProcessSpec("ar1", a=0.5)
    e = innovations("standard-normal", 20 + 512, draw_rng(6))
    v = generate(spec, 20, draw_rng(6))
    np.testing.assert_allclose(v[1:], 0.5 * v[:-1] + e[513:], atol=1e-12)


def test_garch_stationarity_guard():
    with pytest.raises(ValueError):
        ProcessSpec("garch11", alpha=0.6, beta=0.4)
    with pytest.raises(ValueError):
        ProcessSpec("ar1", a=1.0)


def test_overlays():
    base = ProcessSpec("ar1", a=-0.5)
    shifted = ProcessSpec("ar1", a=-0.5, change_at=100, shift=0.3)
    d = generate(shifted, 200, draw_rng(7)) - generate(base, 200, draw_rng(7))
    np.testing.assert_allclose(d[:100], 0)
    np.testing.assert_allclose(d[100:], 0.3)
    y = generate(ProcessSpec("randomwalk", rho=1.0), 50, draw_rng(8))
    assert y.size == 51 and y[0] == 0
    np.testing.assert_allclose(np.diff(y), innovations("standard-normal", 50, draw_rng(8)))
    with pytest.raises(ValueError):
        generate(ProcessSpec(change_at=0, shift=1.0), 10, draw_rng(0))


def test_uniform_pvalues_give_diagonal_size():
    R = 200
    p = np.arange(1, R + 1) / R
    grid = np.arange(1, R + 1) / R
    curve = asp_curve(p, p, grid)
    np.testing.assert_allclose(curve.size, grid, atol=1e-12)
    np.testing.assert_allclose(curve.power, grid, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_asp_curve_invariants(seed):
    rng = draw_rng(seed)
    p0 = rng.random(150)
    p1 = rng.random(150) ** 2
    curve = asp_curve(p0, p1)
    for c in (curve.size, curve.power):
        assert np.all(np.diff(c) >= 0)
        assert np.all((c >= 0) & (c <= 1))
        assert c[-1] == 1.0


def test_asp_csv_round_trip(tmp_path):
    rng = draw_rng(9)
    curve = asp_curve(rng.random(120), rng.random(120), B=99)
    path = tmp_path / "asp.csv"
    emit_asp_csv(curve, path)
    back = read_asp_csv(path)
    np.testing.assert_array_equal(back.size, np.array([float(f"{v:.12g}") for v in curve.size]))
    np.testing.assert_array_equal(back.power, np.array([float(f"{v:.12g}") for v in curve.power]))
    assert (back.R, back.B) == (120, 99)
    emit_asp_csv(ASPCurve(np.empty(0), np.empty(0), np.empty(0), 0, 0), path)
    assert path.read_text() == "nominal,size,power,R,B\n"
    emit_asp_csv(ASPCurve(np.array([0.05]), np.array([0.04]), np.array([0.3]), 500, 500), path)
    rows = path.read_text().splitlines()
    assert len(rows) == 2 and len(rows[1].split(",")) == 5
    with pytest.raises(OSError, match="nope"):
        emit_asp_csv(curve, tmp_path / "nope" / "x.csv")


def test_identical_hypotheses_give_diagonal_power():
    spec = ProcessSpec("ar1", a=0.3)
    config = SchemeConfig("RB", Kernel("bpk", 0.2))
    # B = 999 keeps p-value atoms at 1/1000 so the binomial band applies
    curve = run_asp(spec, spec, "cpt", config, T=60, R=200, B=999, seed=3)
    a = curve.nominal
    band = 3 * np.sqrt(2 * a * (1 - a) / 200) + 1 / 1000
    assert np.all(np.abs(curve.power - a) <= band)


def test_parallel_map_is_schedule_independent():
    from concurrent.futures import ThreadPoolExecutor

    spec = ProcessSpec("ar1", a=0.2)
    config = SchemeConfig("WB", Kernel("bpk", 0.3))
    serial = simulate_pvalues(spec, 40, "cpt", config, 12, 99, seed=5)
    with ThreadPoolExecutor(3) as pool:
        pooled = simulate_pvalues(spec, 40, "cpt", config, 12, 99, seed=5, map_fn=pool.map)
    np.testing.assert_array_equal(serial, pooled)


def test_run_asp_checks_counts():
    spec = ProcessSpec()
    with pytest.raises(ValueError):
        run_asp(spec, spec, "cpt", SchemeConfig(), R=50, B=99)
    with pytest.raises(ValueError):
        run_asp(spec, spec, "cpt", SchemeConfig(), R=100, B=10)


def test_experiment_parser():
    exp = parse_experiment(
        """
        # unit-root study
        test = unitroot
        h = 0.03
        garch-form = printed
        full_scale = yes
        change_at = 90
        """
    )
    assert (exp.test, exp.h, exp.garch_form, exp.change_at) == ("unitroot", 0.03, "printed", 90)
    assert exp.counts() == (1000, 1000)
    h0, h1 = exp.specs()
    assert h0.family == "randomwalk" and h0.rho == 1.0 and h1.rho == 0.95
    with pytest.raises(ValueError, match="unknown key"):
        parse_experiment("colour = red")
    with pytest.raises(ValueError, match="line 1"):
        parse_experiment("just words")
