import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from adiabatic_rate.core import (
    DomainError,
    FidelityCurve,
    RampProtocol,
    fidelity_from_rate,
    momentum_grid,
    ramp_value,
    rate_from_fidelity,
    rate_from_infidelities,
)


@pytest.mark.parametrize("t, expected", [(0, 1.4), (10, 1.6), (5, 1.5)])
def test_ramp_value_endpoints_and_midpoint(t, expected):
    assert ramp_value(RampProtocol(1.4, 1.6, 10), t) == pytest.approx(expected, abs=1e-15)


def test_ramp_value_outside_interval():
    with pytest.raises(DomainError):
        ramp_value(RampProtocol(1.4, 1.6, 10), 10.5)
    with pytest.raises(DomainError):
        RampProtocol(0, 1, -1)


def test_zero_duration_ramp_sits_at_final_value():
    assert ramp_value(RampProtocol(1.4, 1.6, 0.0), 0.0) == 1.6


@given(st.floats(0, 10), st.floats(0, 10))
def test_ramp_monotone(t1, t2):
    p = RampProtocol(-1.0, 2.0, 10.0)
    lo, hi = sorted((t1, t2))
    assert ramp_value(p, lo) <= ramp_value(p, hi)


def test_momentum_grid_examples():
    assert np.allclose(momentum_grid(4).modes, [np.pi / 4, 3 * np.pi / 4])
    assert np.allclose(momentum_grid(2).modes, [np.pi / 2])
    g = momentum_grid(4096)
    assert len(g) == 2048
    assert g.modes.max() == pytest.approx(4095 / 4096 * np.pi, rel=1e-15)
    assert g.modes.max() < np.pi and g.modes.min() > 0


@pytest.mark.parametrize("N", [0, 3, 7, 2.0])
def test_momentum_grid_rejects_bad_N(N):
    with pytest.raises(DomainError):
        momentum_grid(N)


def test_rate_from_fidelity_examples():
    assert rate_from_fidelity(1.0, 8) == 0.0
    assert rate_from_fidelity(math.exp(-10), 10) == pytest.approx(1.0, rel=1e-15)
    assert rate_from_fidelity(0.81, 2) == pytest.approx(0.105360515657826, rel=1e-12)


@pytest.mark.parametrize("F", [0.0, -0.1, 1.5])
def test_rate_from_fidelity_domain(F):
    with pytest.raises(DomainError):
        rate_from_fidelity(F, 4)


@given(st.floats(1e-300, 1.0), st.integers(1, 10**6))
def test_round_trip(F, N):
    back = fidelity_from_rate(rate_from_fidelity(F, N), N)
    assert back == pytest.approx(F, rel=1e-14 * max(1.0, -math.log(F)))


def test_infidelity_sum_keeps_precision():
    g = np.full(500, 1e-18)
    assert rate_from_infidelities(g, 1000, weight=2) == pytest.approx(1e-15, rel=1e-12)
    with pytest.raises(DomainError):
        rate_from_infidelities([0.1, 1.0], 4)


def test_fidelity_curve():
    c = FidelityCurve("tfim", 1.4, 1.6)
    c.add(8, 2.0, 0.1)
    c.add(4, 1.0, 0.2)
    c.add(4, 0.5, 0.3)
    assert c.sorted_rows() == [(4, 0.5, 0.3), (4, 1.0, 0.2), (8, 2.0, 0.1)]
    T, f = c.series(4)
    assert list(T) == [0.5, 1.0]
    with pytest.raises(DomainError):
        c.add(4, 1.0, 0.5)
    with pytest.raises(DomainError):
        c.add(16, 1.0, -1e-3)
