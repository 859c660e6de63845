import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from pseudowronskian import (
    InvalidArgument,
    finite_integral,
    make_exp_cos,
    make_triangular,
    tail_integral_abs,
    tail_integral_signed,
    weighted_tail_integral,
)
from pseudowronskian.coefficients import triangular_profile
from pseudowronskian.errors import HorizonExhausted, QuadratureFailure
from pseudowronskian.quadrature import (
    forward_cumulative,
    linear_abs_power_integral,
    moment_tail_integral,
    reverse_cumulative,
    truncation_horizon,
)
from pseudowronskian.core import GridFunction

EXP_COS = make_exp_cos()
TRI4 = make_triangular(4)


def closed_S(t):
    return math.cos(t + math.pi / 4) * math.exp(-t) / math.sqrt(2)


def test_finite_integral_polynomial():
    res = finite_integral(lambda s: s**3, 0.0, 2.0, 1e-12)
    assert res.value == pytest.approx(4.0, abs=1e-12)
    assert res.error_estimate <= 1e-12


def test_finite_integral_matches_scipy_quad():
    f = lambda s: np.exp(-s) * np.sin(3 * s) / s
    ref, _ = integrate.quad(f, 1.0, 15.0, epsabs=1e-13, limit=200)
    assert finite_integral(f, 1.0, 15.0, 1e-11).value == pytest.approx(ref, abs=1e-11)


def test_finite_integral_rejects_reversed_bounds():
    with pytest.raises(InvalidArgument):
        finite_integral(np.sin, 2.0, 1.0, 1e-8)


def test_finite_integral_budget_exhaustion_carries_estimate():
    with pytest.raises(QuadratureFailure) as info:
        finite_integral(lambda s: np.sin(1.0 / s), 1e-6, 1.0, 1e-14, max_evals=3000)
    assert math.isfinite(info.value.value)


def test_abs_tail_at_one_below_exp_bound():
    res = tail_integral_abs(EXP_COS, 1.0, 1e-10)
    assert res.value <= math.exp(-1) + res.budget


def test_abs_tail_tri_cells_checkpoint():
    res = tail_integral_abs(TRI4, 11.0, 1e-10)
    assert res.value == pytest.approx(49 / 16, abs=1e-10)


def test_signed_tail_at_quarter_pi_closed_form_zero():
    # pi/4 < 1 lies outside the quadrature domain; only the closed form is checked
    assert abs(float(EXP_COS.signed_tail(math.pi / 4))) < 1e-16


def test_signed_tail_at_one():
    res = tail_integral_signed(EXP_COS, 1.0, 1e-10)
    assert abs(res.value - closed_S(1.0)) <= 1e-8
    assert res.reference == pytest.approx(closed_S(1.0), rel=1e-15)


def test_signed_tail_tri_cells_checkpoint():
    assert tail_integral_signed(TRI4, 11.0, 1e-11).value == pytest.approx(-15 / 16, abs=1e-10)
    assert tail_integral_signed(TRI4, 15.0, 1e-11).value == pytest.approx(15 / 16, abs=1e-10)


def test_signed_tail_below_domain():
    with pytest.raises(InvalidArgument):
        tail_integral_signed(EXP_COS, 0.5, 1e-10)


@given(st.floats(1.0, 20.0))
def test_signed_tail_oracle_equivalence(t):
    res = tail_integral_signed(EXP_COS, t, 1e-10)
    assert abs(res.value - closed_S(t)) <= res.budget


@given(st.floats(1.0, 10.0), st.floats(20.0, 60.0))
def test_truncation_error_nonincreasing_in_horizon(t, T):
    a = tail_integral_abs(EXP_COS, t, 1e-8, t_max=T)
    b = tail_integral_abs(EXP_COS, t, 1e-8, t_max=T + 5.0)
    assert b.truncation_error <= a.truncation_error


def test_weighted_tail_linear_weight():
    # weight 2s gives 2 S(t)
    for t in (1.0, 3.0, 7.5):
        res = weighted_tail_integral(EXP_COS, lambda s: 2.0 * s, t, 1e-10)
        assert abs(res.value - 2 * closed_S(t)) <= res.budget + 1e-10


@given(st.floats(0.1, 10.0), st.floats(1.0, 10.0))
def test_weighted_tail_linearity(lam, t):
    w = lambda s: s * np.sin(s)
    base = weighted_tail_integral(EXP_COS, w, t, 1e-10, kappa=1.0)
    scaled = weighted_tail_integral(EXP_COS, lambda s: lam * w(s), t, 1e-10, kappa=lam)
    assert abs(scaled.value - lam * base.value) <= scaled.budget + lam * base.budget


@given(st.integers(1, 30), st.integers(1, 5))
def test_piecewise_linear_exactness_over_cells(k, n):
    lo, hi = 9.0 * k, 9.0 * (k + n)
    f = lambda s: triangular_profile(TRI4, s)
    res = finite_integral(f, lo, hi, 1e-12, points=np.arange(lo, hi + 1.0))
    assert abs(res.value) <= 1e-13


def test_truncation_horizon_exponential():
    T = truncation_horizon(lambda s: math.exp(-s), 1.0, 1e-6)
    assert T == pytest.approx(math.log(1e6), rel=1e-8)


def test_truncation_horizon_exhausted():
    with pytest.raises(HorizonExhausted):
        truncation_horizon(lambda s: 1.0 / s, 1.0, 1e-12, max_horizon=1e4)


def test_moment_tail_decay_power():
    # int_t^inf s * s^-4 ds = t^-2 / 2, bound s^(2-1)|a| with a = s^-4
    from pseudowronskian import make_power

    c = make_power(4.0)
    res = moment_tail_integral(c, lambda s: s ** -3.0, 2.0, 1e-10, 1.0, decay_power=1.0)
    assert abs(res.value - 0.125) <= res.budget


def test_cumulative_passes_are_exact_for_linear():
    t = np.linspace(1, 5, 41)
    f = 2.0 * t
    assert np.allclose(forward_cumulative(t, f), t**2 - 1.0, atol=1e-12)
    assert np.allclose(reverse_cumulative(t, f), 25.0 - t**2, atol=1e-12)


@given(st.floats(0.1, 0.95))
def test_linear_abs_power_integral_against_quad(p):
    t = np.array([1.0, 2.0, 3.5, 5.0])
    v = np.array([1.0, -0.5, 0.25, 2.0])
    g = GridFunction(t, v)
    ref = sum(
        integrate.quad(lambda s, i=i: abs(np.interp(s, t, v)) ** p, t[i], t[i + 1], points=[], limit=200)[0]
        for i in range(3)
    )
    assert linear_abs_power_integral(g, p) == pytest.approx(ref, rel=1e-8)
