import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adiabatic_rate.analysis import FitError, envelope_extract, extrapolate_quadratic, powerlaw_fit

T10 = np.geomspace(1, 1000, 10)


def test_exact_inverse_square():
    fit = powerlaw_fit(list(zip(T10, 3 / T10**2)))
    assert fit.exponent == pytest.approx(-2, abs=1e-12)
    assert fit.amplitude == pytest.approx(3, abs=1e-12)
    assert fit.n_points == 10
    assert fit.rms_residual < 1e-12


def test_exact_inverse_sqrt():
    fit = powerlaw_fit(list(zip(T10, 5 / np.sqrt(T10))))
    assert fit.exponent == pytest.approx(-0.5, abs=1e-13)


def test_window_and_errors():
    rows = list(zip(T10, 1 / T10))
    assert powerlaw_fit(rows, (10, 1000)).n_points == 7
    with pytest.raises(FitError):
        powerlaw_fit(rows, (500, 1000))
    bad = rows[:5] + [(2000.0, 0.0)]
    with pytest.raises(FitError):
        powerlaw_fit(bad)
    with pytest.raises(FitError):
        powerlaw_fit([])


@settings(max_examples=30)
@given(st.floats(1e-6, 1e6), st.floats(-3, 3))
def test_scale_equivariance(c, p):
    f = 2.0 * T10**p * (1 + 0.1 * np.sin(T10))
    a = powerlaw_fit(list(zip(T10, f)))
    b = powerlaw_fit(list(zip(T10, c * f)))
    assert b.exponent == pytest.approx(a.exponent, abs=1e-12)
    assert b.amplitude == pytest.approx(c * a.amplitude, rel=1e-12)


def test_envelope_monotone_empty():
    T = np.linspace(1, 10, 20)
    assert envelope_extract(list(zip(T, 1 / T))) == []


def test_envelope_synthetic():
    T = np.linspace(5, 200, 20000)
    f = (1 + np.sin(T) ** 2) / T**2
    env = envelope_extract(list(zip(T, f)))
    assert len(env) > 50
    assert all(abs(np.sin(t)) > 0.95 for t, _ in env)
    assert powerlaw_fit(env).exponent == pytest.approx(-2, abs=0.05)


@given(st.lists(st.floats(-1e3, 1e3), min_size=5, max_size=60))
def test_envelope_is_increasing_subsequence(vals):
    T = np.arange(len(vals), dtype=float)
    rows = list(zip(T, vals))
    env = envelope_extract(rows)
    assert all(r in rows for r in env)
    assert all(a[0] < b[0] for a, b in zip(env, env[1:]))
    assert all(t not in (T[0], T[-1]) for t, _ in env)


def test_envelope_requires_ascending_T():
    with pytest.raises(FitError):
        envelope_extract([(1, 1), (3, 2), (2, 1), (4, 0), (5, 1)])


def test_extrapolation_exact_recovery():
    N = np.array([8, 16, 32, 64])
    fit = extrapolate_quadratic(list(zip(N, 0.3 + 2 / N - 4 / N**2)))
    assert fit.g == pytest.approx(0.3, abs=1e-10)
    assert fit.h == pytest.approx(2, abs=1e-8)
    assert fit.i == pytest.approx(-4, abs=1e-7)


def test_extrapolation_constant():
    fit = extrapolate_quadratic([(10, 0.7), (20, 0.7), (40, 0.7)])
    assert fit.g == pytest.approx(0.7, abs=1e-12)
    assert abs(fit.h) < 1e-9 and abs(fit.i) < 1e-8


@settings(max_examples=30)
@given(st.floats(-10, 10), st.floats(-100, 100), st.floats(-1000, 1000))
def test_extrapolation_reproduces_any_quadratic(g, h, i):
    N = np.array([12.0, 24, 48, 96, 192])
    fit = extrapolate_quadratic(list(zip(N, g + h / N + i / N**2)))
    assert fit.g == pytest.approx(g, abs=1e-10 * max(1, abs(h), abs(i)))


def test_extrapolation_rank_deficiency():
    with pytest.raises(FitError):
        extrapolate_quadratic([(8, 1.0), (8, 1.1), (16, 1.0)])


def test_extrapolation_on_tfim_gapped_data():
    from adiabatic_rate import tfim
    from adiabatic_rate.core import RampProtocol

    ramp = RampProtocol(1.4, 1.6)
    pts = [(N, tfim.rate_function_finite(N, ramp, 50.0)) for N in (64, 128, 256)]
    ref = tfim.rate_function_finite(4096, ramp, 50.0)
    assert abs(extrapolate_quadratic(pts).g - ref) < 1e-3
