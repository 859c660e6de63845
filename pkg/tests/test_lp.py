import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from pseudowronskian import (
    GridFunction,
    InvalidArgument,
    condition_19,
    empirical_lp_norm,
    lp_report,
    make_exp_cos,
    make_power,
    make_triangular,
    theoretical_lp_bound,
)
from pseudowronskian.coefficients import cell_height
from pseudowronskian.lp import abs_tail_function, cell_bounds, cell_constant, cell_height_bound, cell_integrals

EXP_COS = make_exp_cos()
TRI4 = make_triangular(4)


def exp_cos_condition_oracle(p):
    # e^s A(s) = int_0^inf |cos(s + u)| e^-u du, so the integrand is s^(1-p) e^(-p s) |cos s| / J(s)^(1-p)
    def J(s):
        return quad(lambda u: abs(math.cos(s + u)) * math.exp(-u), 0, 50, limit=200, epsabs=1e-14)[0]

    def g(s):
        return s ** (1 - p) * math.exp(-p * s) * abs(math.cos(s)) / J(s) ** (1 - p)

    pts = [math.pi / 2 + math.pi * n for n in range(40) if 1 < math.pi / 2 + math.pi * n < 120]
    return quad(g, 1.0, 120.0, points=pts, limit=500, epsabs=1e-12)[0]


def test_condition_exp_cos_against_scipy():
    res = condition_19(EXP_COS, 0.5)
    assert res.flattened and res.last_decade_fraction <= 1e-6
    assert res.value == pytest.approx(exp_cos_condition_oracle(0.5), abs=1e-8)


def test_condition_power_closed_form():
    # a = t^-5: A = t^-2 / 2, integrand 2^(1/4) s^(-9/4) for p = 3/4
    res = condition_19(make_power(5.0), 0.75)
    exact = 2**0.25 / 1.25
    assert abs(res.value - exact) <= res.budget + 1e-12
    assert not res.flattened


def test_condition_p_range():
    for p in (0.0, 1.0, 1.5):
        with pytest.raises(InvalidArgument):
            condition_19(EXP_COS, p)


def test_abs_tail_function_matches_closed_form():
    A = abs_tail_function(TRI4, 9.0, 300.0)
    for k in (1, 5, 20):
        assert A(9.0 * k + 2) == pytest.approx(float(TRI4.abs_tail(9.0 * k + 2)), rel=1e-12)


def test_abs_tail_function_by_quadrature():
    A = abs_tail_function(EXP_COS, 1.0, 40.0)
    ref = quad(lambda s: abs(math.cos(s)) * math.exp(-s), 3.0, 60.0, limit=200, epsabs=1e-14)[0]
    assert A(3.0) == pytest.approx(ref, rel=1e-9)


def test_cell_constant_value():
    assert cell_constant(4, 0.5) == pytest.approx(9 * 1.5 * 15)


@pytest.mark.parametrize("k", [1, 2, 7])
def test_cell_height_bound_dominates(k):
    assert cell_height(k, 4) <= cell_height_bound(4, k)


def test_cell_integrals_dominated():
    ks = np.arange(1, 101)
    I = cell_integrals(TRI4, 0.5, ks)
    assert np.all(I > 0)
    assert np.all(I <= cell_bounds(4, 0.5, ks))


def test_cell_series_matches_direct_quadrature():
    ks = np.arange(1, 101)
    partial = float(np.sum(cell_integrals(TRI4, 0.5, ks)))
    direct = condition_19(TRI4, 0.5, t_from=9.0, max_horizon=909.0)
    assert partial == pytest.approx(direct.value, rel=1e-8)


def test_series_comparison_verdict():
    # the cell series converges when (1 + alpha) p - 1 > 1, i.e. alpha > 3 for p = 1/2
    assert condition_19(TRI4, 0.5, t_from=9.0).series_certified is True
    assert condition_19(make_triangular(2), 0.5, t_from=9.0).series_certified is False
    assert condition_19(EXP_COS, 0.5).series_certified is None


@given(st.floats(0.1, 0.9))
def test_empirical_norm_of_constant(p):
    g = GridFunction([1.0, 4.0], [0.5, 0.5])
    assert empirical_lp_norm(g, p) == pytest.approx(3 * 0.5**p, rel=1e-12)


def test_empirical_norm_sign_change():
    # |1 - s|^(1/2) on [0, 2] integrates to 4/3
    g = GridFunction([1.0, 3.0], [1.0, -1.0])
    assert empirical_lp_norm(g, 0.5) == pytest.approx(4 / 3, rel=1e-12)


def test_theoretical_bound_factor():
    cond = condition_19(EXP_COS, 0.5).value
    assert theoretical_lp_bound(EXP_COS, 0.5, 1.0, 1.0, 1.0, 1.0) == pytest.approx(math.sqrt(2) * 3 * cond)


def test_report_on_solution(exp_cos_solution):
    rep = lp_report(exp_cos_solution, 0.5)
    assert rep.passed
    assert rep.envelope_ok
    assert rep.empirical_norm <= rep.theoretical_bound + rep.combined_budget
    assert rep.condition.flattened
    assert rep.to_dict()["pass"] is True
