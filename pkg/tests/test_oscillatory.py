import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from pseudowronskian import (
    GridFunction,
    Infeasible,
    InvalidArgument,
    NoConvergence,
    OscProblem,
    PreconditionViolation,
    apply_V_contraction,
    asymptote_defect,
    check_gate,
    estimate_L_indicators,
    feasibility_search,
    identity,
    make_exp_cos,
    make_exponential,
    make_power,
    make_triangular,
    picard_solve,
    power,
    scale_linear,
    solve_pipeline,
    witness_sequences,
)
from pseudowronskian.core import Nonlinearity
from pseudowronskian.errors import DomainViolation
from pseudowronskian.oscillatory import initial_slope, solver_grid, structural_checkpoints
from pseudowronskian.quadrature import tail_integral_abs, weighted_tail_integral

EXP_COS = make_exp_cos()


def exp_cos_problem(c=1.0, eta=1.0):
    return OscProblem(EXP_COS, identity(), c, eta, 1.0)


@pytest.fixture(scope="module")
def small_grid():
    return solver_grid(exp_cos_problem(), horizon=40.0, density=2000.0)


# gate and indicators


def test_gate_for_exp_cos():
    g = check_gate(exp_cos_problem())
    assert g["passed"]
    assert g["tail"] <= math.exp(-1)
    assert g["threshold"] == 0.5 and g["q"] == 0.5


def test_gate_arithmetic_for_eta_grid():
    # the envelope e^-1 alone makes every eta >= 1 / (e - 1) ~ 0.582 pass
    assert check_gate(exp_cos_problem(eta=1.0 / (math.e - 1)))["passed"]
    # the computed tail is sharper, so smaller eta pass too, down to A / (1 - A)
    ref, _ = quad(lambda s: s * s * abs(EXP_COS.func(s)), 1.0, 60.0, limit=500, epsabs=1e-13)
    eta_min = ref / (1 - ref)
    assert check_gate(exp_cos_problem(eta=0.25))["threshold"] == pytest.approx(0.2)
    assert check_gate(exp_cos_problem(eta=1.001 * eta_min))["passed"]
    assert not check_gate(exp_cos_problem(eta=0.999 * eta_min))["passed"]


def test_gate_rejects_non_lipschitz():
    with pytest.raises(PreconditionViolation):
        check_gate(OscProblem(EXP_COS, power(2.0), 1.0, 1.0, 1.0))


def test_gate_rejects_w_not_vanishing_at_zero():
    w = Nonlinearity(lambda x: x + 1.0, 1.0)
    with pytest.raises(PreconditionViolation):
        check_gate(OscProblem(EXP_COS, w, 1.0, 1.0, 1.0))


def test_problem_validation():
    with pytest.raises(InvalidArgument):
        OscProblem(EXP_COS, identity(), 0.0, 1.0, 1.0)
    with pytest.raises(InvalidArgument):
        OscProblem(EXP_COS, identity(), 1.0, -1.0, 1.0)
    with pytest.raises(InvalidArgument):
        OscProblem(EXP_COS, identity(), 1.0, 1.0, 0.5)


def test_indicators_exp_cos_unbounded_both_ways():
    # |R| grows roughly like t, so the far checkpoints sit past t = 1000
    n = np.concatenate([np.arange(1, 11), np.arange(401, 407)])
    peaks = math.pi * n - math.pi / 4
    est = estimate_L_indicators(EXP_COS, identity(), 1.0, peaks)
    assert est.verdict == "both-sides"
    assert est.L_plus_observed > 1e3 and est.L_minus_observed < -1e3
    ok = ~est.skipped
    assert np.all(np.sign(est.ratios[ok][1:]) != np.sign(est.ratios[ok][:-1]))


def test_indicators_tri_cells_closed_form_vs_quadrature():
    c = make_triangular(4)
    cps = structural_checkpoints(c, 20)
    closed = estimate_L_indicators(c, identity(), 1.0, cps, use_closed_form=True)
    quad = estimate_L_indicators(c, identity(), 1.0, cps)
    assert np.allclose(closed.ratios, quad.ratios, rtol=1e-8)
    assert closed.ratios[0] == pytest.approx(-165 / 49)


def test_indicators_one_sided_for_positive_coefficient():
    est = estimate_L_indicators(make_exponential(), identity(), 1.0, [1.0, 2.0, 5.0])
    assert est.verdict == "one-sided"


def test_indicators_need_increasing_checkpoints():
    with pytest.raises(InvalidArgument):
        estimate_L_indicators(EXP_COS, identity(), 1.0, [2.0, 1.0])


def test_structural_checkpoints_interleave():
    pts = structural_checkpoints(make_triangular(4), 3)
    assert pts.tolist() == [11.0, 15.0, 20.0, 24.0, 29.0, 33.0]
    with pytest.raises(InvalidArgument):
        structural_checkpoints(EXP_COS, 3)


def test_feasibility_picks_largest_eta():
    peaks = math.pi * np.arange(1, 20) - math.pi / 4
    est = estimate_L_indicators(EXP_COS, identity(), 1.0, peaks)
    prob = feasibility_search(EXP_COS, identity(), 1.0, [0.25, 1.0, 0.5], est)
    assert prob.eta == 1.0 and prob.t_start == 1.0
    assert prob.gate["margin_reading_k_eta"]


def test_feasibility_rejects_one_sided():
    est = estimate_L_indicators(make_exponential(), identity(), 1.0, [1.0, 2.0])
    with pytest.raises(PreconditionViolation):
        feasibility_search(make_exponential(), identity(), 1.0, [1.0], est)


def test_feasibility_infeasible_eta():
    peaks = [math.pi - math.pi / 4, 2 * math.pi - math.pi / 4]
    est = estimate_L_indicators(EXP_COS, identity(), 1.0, peaks)
    with pytest.raises(Infeasible):
        feasibility_search(EXP_COS, identity(), 1.0, [1e9], est)


# the operator


def random_ball(rng, t, eta, n):
    # smooth random shapes plus node noise, scaled into t |y| <= eta
    out = []
    for _ in range(n):
        freq = rng.uniform(0.1, 5.0)
        shape = np.sin(freq * t + rng.uniform(0, 6.3)) * rng.uniform(0, 1)
        shape += rng.uniform(-1, 1, t.size) * rng.uniform(0, 0.5)
        shape /= max(1.0, np.max(np.abs(shape)))
        out.append(eta * shape / t)
    return out


def test_D_invariance_on_random_inputs(rng, small_grid):
    prob = exp_cos_problem()
    t = small_grid
    for y in random_ball(rng, t, prob.eta, 200):
        v = apply_V_contraction(GridFunction(t, y), prob)
        assert np.max(t * np.abs(v.values)) <= prob.eta + 1e-9


def test_contraction_on_random_pairs(rng, small_grid):
    prob = exp_cos_problem()
    t = small_grid
    ys = random_ball(rng, t, prob.eta, 100)
    for y1, y2 in zip(ys[::2], ys[1::2]):
        d_in = np.max(t * np.abs(y1 - y2))
        v1 = apply_V_contraction(GridFunction(t, y1), prob).values
        v2 = apply_V_contraction(GridFunction(t, y2), prob).values
        assert np.max(t * np.abs(v1 - v2)) <= prob.q * d_in + 1e-12


def test_operator_rejects_points_outside_ball(small_grid):
    t = small_grid
    with pytest.raises(DomainViolation):
        apply_V_contraction(GridFunction(t, 2.0 / t), exp_cos_problem())


def test_first_iterate_closed_form(small_grid):
    # V(0)(t) = (c / t) int_t^inf s^2 a(s) ds, truncated at the last node
    t = small_grid
    v = apply_V_contraction(GridFunction(t, np.zeros_like(t)), exp_cos_problem()).values
    S = EXP_COS.signed_tail(t) - EXP_COS.signed_tail(t[-1])
    assert np.max(t * np.abs(v - S / t)) <= 1e-6


# solving


def test_solution_contracts_and_converges(exp_cos_solution):
    d = exp_cos_solution.diagnostics
    assert d.converged
    assert d.max_ratio <= 0.5 + 0.05
    assert d.extra["ratio_ok"]


def test_solution_stays_in_ball(exp_cos_solution):
    t, y = exp_cos_solution.t, exp_cos_solution.fixed_point.values
    assert np.max(t * np.abs(y)) <= 1.0


def test_asymptote_at_twenty(exp_cos_solution):
    assert abs(float(exp_cos_solution.trajectory.x(20.0)) - 20.0) <= 1e-6


def test_wronskian_identity_on_reconstruction(exp_cos_solution):
    from pseudowronskian import pseudo_wronskian

    W = pseudo_wronskian(exp_cos_solution.trajectory).values
    y = exp_cos_solution.fixed_point.values
    t = exp_cos_solution.t
    assert np.max(np.abs(W - y)) <= 1e-14 * np.max(np.abs(exp_cos_solution.trajectory.x.values / t))


def test_initial_slope_formula(exp_cos_solution):
    sol = exp_cos_solution
    t, y = sol.t, sol.fixed_point.values
    g = y / t
    inner = float(np.sum(0.5 * np.diff(t) * (g[1:] + g[:-1])))
    assert initial_slope(sol) == pytest.approx(1.0 - inner + y[0], abs=1e-14)


def test_fixed_point_residual(exp_cos_solution):
    sol = exp_cos_solution
    v = apply_V_contraction(sol.fixed_point, sol.problem).values
    assert np.max(sol.t * np.abs(v - sol.fixed_point.values)) <= 1e-11


def test_fixed_point_matches_independent_quadrature(exp_cos_solution):
    # t y0(t) = int_t^inf s a(s) x0(s) ds, checked at a few nodes with the adaptive quadrature
    sol = exp_cos_solution
    x = sol.trajectory.x
    for s in (1.0, 3.0, 7.0):
        i = int(np.searchsorted(sol.t, s))
        ti = float(sol.t[i])
        res = weighted_tail_integral(EXP_COS, lambda u: np.interp(u, x.abscissae, x.values), ti, 1e-10,
                                     kappa=2.0, t_max=float(sol.t[-1]))
        assert abs(res.value - ti * sol.fixed_point.values[i]) <= sol.budget.values[i] + 1e-9


def test_asymptote_defect_report(exp_cos_solution):
    rep = asymptote_defect(exp_cos_solution, 1.0, np.linspace(5, 40, 36))
    assert rep.within_bound
    assert rep.decreasing
    assert rep.final_defect <= 1e-12


def test_witnesses_alternate_and_are_valid(exp_cos_solution):
    sol = exp_cos_solution
    rep = sol.witnesses
    assert rep.n_pairs >= 5
    assert rep.interleaving_ok
    both = np.sort(np.concatenate([rep.negative_witnesses, rep.positive_witnesses]))
    assert both[0] == rep.negative_witnesses[0]
    # same-sign witnesses one cosine period apart, strictly interleaved
    assert np.diff(rep.negative_witnesses) == pytest.approx(np.full(rep.n_pairs - 1, 2 * math.pi), abs=0.2)
    assert np.all(rep.negative_witnesses < rep.positive_witnesses)
    assert np.all(rep.positive_witnesses[:-1] < rep.negative_witnesses[1:])
    assert np.all(rep.negative_values < 0) and np.all(rep.positive_values > 0)
    assert np.all(rep.details["negative_lhs_scaled"] < 0)
    assert np.all(rep.details["positive_lhs_scaled"] > 0)
    assert rep.positive_witnesses[-1] <= 30.0


def scaled_tails(t):
    """e^t S(t) in closed form and e^t A(t) = int_0^inf |cos(t + u)| e^-u du by scipy."""
    n_ref = math.cos(t + math.pi / 4) / math.sqrt(2)
    a_ref, _ = quad(lambda u: abs(math.cos(t + u)) * math.exp(-u), 0.0, 60.0, limit=400, epsabs=1e-13)
    return n_ref, a_ref


def test_witness_inequalities_recomputed(exp_cos_solution):
    rep = exp_cos_solution.witnesses
    for tn in rep.negative_witnesses:
        n_ref, a_ref = scaled_tails(tn)
        assert tn * n_ref + a_ref < 0
    for tp in rep.positive_witnesses:
        n_ref, a_ref = scaled_tails(tp)
        assert tp * n_ref - a_ref > 0


@pytest.fixture(scope="module")
def tri_solution():
    c = make_triangular(4)
    est = estimate_L_indicators(c, identity(), 1.0, structural_checkpoints(c, 200), use_closed_form=True)
    prob = feasibility_search(c, identity(), 1.0, [1.0, 0.5, 0.25], est)
    sol = picard_solve(prob)
    return prob, sol, witness_sequences(sol, prob, 3, t_max=200.0)


def test_tri_cells_witnesses_at_checkpoints(tri_solution):
    prob, sol, rep = tri_solution
    assert rep.n_pairs >= 3
    assert all((t - 2) % 9 == 0 for t in rep.negative_witnesses)
    assert all((t - 6) % 9 == 0 for t in rep.positive_witnesses)
    assert sol.diagnostics.max_ratio <= prob.q


def test_scaling_by_solving_twice():
    one = solve_pipeline(EXP_COS, identity(), 1.0, 1.0, horizon=40.0, density=2000.0)
    two = solve_pipeline(EXP_COS, identity(), 2.0, 2.0, horizon=40.0, density=2000.0)
    t = one.t
    assert np.array_equal(t, two.t)
    gap = np.max(t * np.abs(two.fixed_point.values - 2 * one.fixed_point.values))
    assert gap <= 1e-6 + float(np.max(two.budget.values + 2 * one.budget.values))
    assert np.allclose(two.witnesses.negative_witnesses, one.witnesses.negative_witnesses)


@given(st.floats(-5, 5).filter(lambda v: abs(v) > 1e-3))
def test_scale_linear_relation(lam):
    base = solve_pipeline(EXP_COS, identity(), 1.0, 1.0, horizon=30.0, density=500.0)
    sc = scale_linear(base, lam)
    assert np.array_equal(sc.fixed_point.values, lam * base.fixed_point.values)
    assert sc.c == lam
    rep = sc.witnesses
    assert np.all(rep.positive_values > 0) and np.all(rep.negative_values < 0)
    assert np.all(rep.details["positive_lhs_scaled"] > 0)
    assert np.all(rep.details["negative_lhs_scaled"] < 0)
    if lam < 0:
        assert np.array_equal(rep.positive_witnesses, base.witnesses.negative_witnesses)


def test_scale_linear_rejects_nonlinear():
    w = Nonlinearity(np.sin, 1.0, name="sin")
    prob = OscProblem(EXP_COS, w, 1.0, 1.0, 1.0)
    sol = picard_solve(prob, horizon=30.0, density=500.0)
    with pytest.raises(PreconditionViolation):
        scale_linear(sol, 2.0)


def test_nonlinear_lipschitz_solve():
    w = Nonlinearity(np.sin, 1.0, name="sin")
    sol = picard_solve(OscProblem(EXP_COS, w, 1.0, 1.0, 1.0), horizon=30.0, density=2000.0)
    assert sol.diagnostics.max_ratio <= 0.5


def test_picard_gate_failure():
    with pytest.raises(PreconditionViolation):
        picard_solve(exp_cos_problem(eta=0.1))


def test_picard_iteration_cap():
    with pytest.raises(NoConvergence) as info:
        picard_solve(exp_cos_problem(), max_iter=2, horizon=30.0, density=500.0)
    assert info.value.last is not None
