from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ldgm_bpgd.schedule import TABLE1_PRESETS, Schedule, params_from_xi, xi_from_mu


def test_linear_midpoint():
    s = Schedule("linear", 0.025, 0.052, rounds=3)
    assert s.xi_at(1) == pytest.approx(0.0385, abs=1e-15)


def test_exponential_midpoint_is_geometric_mean():
    s = Schedule("exponential", 0.025, 0.052, rounds=3)
    assert s.xi_at(1) == pytest.approx(0.036056, abs=1e-6)
    assert s.xi_at(1) == pytest.approx(math.sqrt(0.025 * 0.052), rel=1e-14)


def test_params_from_xi_values():
    beta, mu = params_from_xi(0.05)
    assert beta == pytest.approx(0.904762, abs=1e-6)
    assert mu == pytest.approx(20.0, rel=1e-15)
    beta, mu = params_from_xi(0.5)
    assert beta == pytest.approx(1 / 3, rel=1e-15)
    assert mu == 2.0


def test_params_soft_limit():
    beta, mu = params_from_xi(1e-9)
    assert beta > 1 - 3e-9 and mu > 1e8


@pytest.mark.parametrize("xi", [0.0, 1.0, -0.1, 1.5])
def test_params_from_xi_domain(xi):
    with pytest.raises(ValueError):
        params_from_xi(xi)


def test_single_round_is_start_point():
    for kind, end in (("constant", None), ("linear", 0.2), ("exponential", 0.2)):
        s = Schedule(kind, 0.1, end, rounds=1)
        assert s.xi_at(0) == 0.1


def test_schedule_validation():
    with pytest.raises(ValueError):
        Schedule("constant", 0.1, 0.2)
    with pytest.raises(ValueError):
        Schedule("linear", 0.2, 0.1)
    with pytest.raises(ValueError):
        Schedule("exponential", 0.1, 1.0)
    with pytest.raises(ValueError):
        Schedule("cosine", 0.1, 0.2)
    with pytest.raises(ValueError):
        Schedule("linear", 0.1, 0.2, rounds=0)
    with pytest.raises(IndexError):
        Schedule("linear", 0.1, 0.2, rounds=5).xi_at(5)


def test_presets_hold_published_endpoints():
    assert TABLE1_PRESETS[100]["constant"].xi_start == 0.050
    assert (TABLE1_PRESETS[1000]["exponential"].xi_start, TABLE1_PRESETS[1000]["exponential"].xi_end) == (0.022, 0.048)
    assert (TABLE1_PRESETS[10000]["linear"].xi_start, TABLE1_PRESETS[10000]["linear"].xi_end) == (0.012, 0.032)


def check_schedule_family(nu: int, lo: float = 0.022, hi: float = 0.048) -> None:
    """Endpoint exactness, monotonicity, constant ratio and the xi/mu round trip."""
    for kind in ("linear", "exponential"):
        s = Schedule(kind, lo, hi, rounds=nu)
        xi = s.xi_values()
        assert xi[0] == lo
        if nu > 1:
            assert xi[-1] == hi
            beta = (1 - xi) / (1 + xi)
            mu = 1 / xi
            assert (np.diff(xi) > 0).all()
            assert (np.diff(beta) < 0).all()
            assert (np.diff(1 / mu) > 0).all()
        if kind == "exponential" and nu > 2:
            ratio = xi[1:] / xi[:-1]
            assert np.ptp(ratio) < 1e-12
        mu = 1 / xi
        assert np.abs(1 / mu - xi).max() < 1e-12
    c = Schedule("constant", lo, rounds=nu).xi_values()
    assert (c == lo).all()


def test_xi_values_agree_with_xi_at():
    for nu in (1, 2, 3, 7, 100):
        for kind, end in (("constant", None), ("linear", 0.3), ("exponential", 0.3)):
            s = Schedule(kind, 0.05, end, rounds=nu)
            assert np.allclose(s.xi_values(), [s.xi_at(r) for r in range(nu)], rtol=1e-15, atol=0)
            assert s.xi_values()[-1] == s.xi_at(nu - 1)


def test_xi_mu_round_trip_scalar():
    for x in np.linspace(0.001, 0.999, 500):
        _, mu = params_from_xi(x)
        assert abs(xi_from_mu(mu) - x) < 1e-12


def test_schedule_family_exhaustive():
    for nu in range(1, 513):
        check_schedule_family(nu)


@settings(max_examples=200, deadline=None)
@given(
    lo=st.floats(1e-4, 0.5),
    span=st.floats(1.01, 1.9),
    nu=st.integers(2, 300),
)
def test_schedule_properties(lo, span, nu):
    hi = min(lo * span, 0.99)
    for kind in ("linear", "exponential"):
        s = Schedule(kind, lo, hi, rounds=nu)
        xi = s.xi_values()
        assert xi[0] == lo and xi[-1] == hi
        assert (np.diff(xi) > 0).all()
        assert ((xi > 0) & (xi < 1)).all()
    # exponential never exceeds linear between the same endpoints (AM-GM)
    lin = Schedule("linear", lo, hi, rounds=nu).xi_values()
    exp = Schedule("exponential", lo, hi, rounds=nu).xi_values()
    assert (exp <= lin + 1e-15).all()


def test_calibrated_presets_bracket_constant():
    from ldgm_bpgd.presets import SEMI_REGULAR_PRESETS, SOFT_PRESETS

    for arms in (*SEMI_REGULAR_PRESETS.values(), SOFT_PRESETS):
        c, lin, exp = arms["constant"], arms["linear"], arms["exponential"]
        assert (lin.xi_start, lin.xi_end) == (exp.xi_start, exp.xi_end)
        assert exp.xi_start <= c.xi_start < exp.xi_end
