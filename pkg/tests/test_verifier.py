import math

import numpy as np
import pytest

from pseudowronskian import (
    Coefficient,
    GridFunction,
    InvalidArgument,
    RKConfig,
    Trajectory,
    agreement,
    identity,
    make_triangular,
    rk_integrate,
    zero_coefficient,
)
from pseudowronskian.verifier import anchored_agreements

ONE = Coefficient(func=lambda t: np.ones_like(np.asarray(t, dtype=float)), tail_bound=lambda t: np.inf * t,
                  name="one")


def harmonic_error(rel, abs_):
    tr = rk_integrate(ONE, identity(), 1.0, 0.0, 0.0, RKConfig(rel_tol=rel, abs_tol=abs_, horizon=10.0))
    return float(np.max(np.abs(tr.x.values - np.cos(tr.t))))


def test_harmonic_oscillator_from_origin():
    assert harmonic_error(1e-10, 1e-12) <= 1e-8


def test_harmonic_oscillator_derivative():
    tr = rk_integrate(ONE, identity(), 1.0, 0.0, 0.0, RKConfig(horizon=10.0))
    assert np.max(np.abs(tr.x_prime.values + np.sin(tr.t))) <= 1e-8


def test_order_sanity():
    # a 5(4) pair: shrinking tolerances by 2^5 should cut the error substantially
    coarse = harmonic_error(1e-6, 1e-8)
    fine = harmonic_error(1e-6 / 32, 1e-8 / 32)
    assert fine < coarse / 4


def test_free_motion_is_linear():
    tr = rk_integrate(zero_coefficient(), identity(), 1.0, 2.0, 1.0, RKConfig(horizon=15.0))
    assert np.max(np.abs(tr.x.values - (1.0 + 2.0 * (tr.t - 1.0)))) <= 1e-11
    assert np.all(tr.x_prime.values == pytest.approx(2.0, abs=1e-12))


def test_initial_data_exact():
    tr = rk_integrate(ONE, identity(), 0.3, -0.7, 1.0, RKConfig(horizon=3.0))
    assert tr.x.values[0] == 0.3 and tr.x_prime.values[0] == -0.7
    assert tr.provenance == "rk-integrated"


def test_breakpoints_are_step_ends():
    c = make_triangular(4)
    tr = rk_integrate(c, identity(), 1.0, 1.0, 1.0, RKConfig(horizon=60.0))
    # x'' = -a x with a = 0 on [1, 9], so x stays on the line until the first cell
    early = tr.t <= 9.0
    assert np.max(np.abs(tr.x.values[early] - tr.t[early])) <= 1e-10


def test_horizon_must_exceed_start():
    with pytest.raises(InvalidArgument):
        rk_integrate(ONE, identity(), 1.0, 0.0, 5.0, RKConfig(horizon=5.0))


def test_grid_outside_range():
    with pytest.raises(InvalidArgument):
        rk_integrate(ONE, identity(), 1.0, 0.0, 1.0, RKConfig(horizon=5.0), grid=np.linspace(1, 6, 10))


def test_bad_config():
    with pytest.raises(InvalidArgument):
        RKConfig(rel_tol=0.0)


def test_agreement_norms():
    t = np.linspace(1, 5, 5)
    a = Trajectory(GridFunction(t, t), GridFunction(t, np.ones(5)))
    b = Trajectory(GridFunction(t, t + 0.1 * t), GridFunction(t, np.ones(5)))
    assert agreement(a, b) == pytest.approx(0.5)
    assert agreement(a, b, "scaled-sup") == pytest.approx(0.1)
    with pytest.raises(InvalidArgument):
        agreement(a, b, "l2")


def test_anchored_agreements_on_exact_solution():
    t = np.linspace(0, 10, 4001)
    exact = Trajectory(GridFunction(t, np.cos(t)), GridFunction(t, -np.sin(t)))
    res = anchored_agreements(ONE, identity(), exact, [2.0, 5.0], RKConfig(horizon=10.0))
    assert set(res) == {2.0, 5.0}
    assert max(res.values()) <= 1e-8


def test_fixed_point_against_rk(exp_cos_solution, exp_cos):
    sol = exp_cos_solution
    tr = sol.trajectory
    rk = rk_integrate(exp_cos, identity(), tr.x.values[0], tr.x_prime.values[0], tr.t0, RKConfig(horizon=20.0))
    assert agreement(tr, rk) <= 1e-6
    anchored = anchored_agreements(exp_cos, identity(), tr, [5.0, 10.0], RKConfig(horizon=20.0))
    # restarting later must not look worse than the full run by more than the same budget
    assert max(anchored.values()) <= 1e-6
