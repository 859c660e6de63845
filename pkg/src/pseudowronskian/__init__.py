"""Asymptotic solutions of x'' + a(t) w(x) = 0 and oscillation of W(x, t) = x' - x/t.

Two fixed-point constructions produce solutions with an oblique asymptote
``c t + o(1)``: a contraction whose fixed point is the pseudo-wronskian
itself (which then oscillates when the coefficient's tail changes sign in
the right way) and a monotone iteration for nonnegative coefficients
(which gives a negative pseudo-wronskian). Everything rests on certified
quadrature of semi-infinite tails and is cross-checked by an independent
Runge-Kutta integrator.
"""

__version__ = "0.1.0"

from .coefficients import (
    coefficient_from_preset,
    make_exp_cos,
    make_exponential,
    make_power,
    make_triangular,
    tabulated_coefficient,
    triangular_checkpoint_tails,
    triangular_L_limits,
)
from .core import (
    Coefficient,
    GridFunction,
    Nonlinearity,
    check_lipschitz,
    check_submultiplicative,
    grid_eval,
    identity,
    make_grid,
    power,
    tabulated_nonlinearity,
    zero_coefficient,
)
from .errors import *  # noqa: F403
from .lp import LpReport, condition_19, empirical_lp_norm, lp_report, theoretical_lp_bound
from .monotone import (
    MonotoneProblem,
    apply_V_monotone,
    check_theorem5_hypotheses,
    knaster_iterate,
    verify_band_and_limits,
)
from .oscillatory import (
    LIndicatorEstimate,
    OscProblem,
    apply_V_contraction,
    asymptote_defect,
    check_gate,
    estimate_L_indicators,
    feasibility_search,
    picard_solve,
    scale_linear,
    solve_pipeline,
    witness_sequences,
)
from .quadrature import (
    QuadResult,
    finite_integral,
    tail_integral_abs,
    tail_integral_signed,
    weighted_tail_integral,
)
from .solution import SolutionCandidate, SolverDiagnostics
from .verifier import RKConfig, agreement, rk_integrate
from .wronskian import (
    OscillationReport,
    Trajectory,
    WronskianScalars,
    oscillation_scan,
    pseudo_wronskian,
    wronskian_voc,
    zero_equation_T,
    zero_structure,
)
