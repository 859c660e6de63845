"""Solutions with asymptote c t and negative pseudo-wronskian by monotone iteration.

For ``a >= 0`` and a nondecreasing, submultiplicative ``w``, the map

    V(u)(t) = t [c + (1/t) int_{t0}^t tau a w(u) dtau + int_t^inf a w(u) dtau]

sends the order interval ``D = {c t <= u <= (c + d) t}`` into itself once
``int_{t0}^inf w(t) a(t) dt <= d / w(c + d)``, and is monotone there. The
iterates ``V^n(c t)`` increase to a fixed point x with ``W(x, t0) = 0`` and
``x/t - x' = (1/t) int_{t0}^t tau a w(x) >= 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Coefficient, GridFunction, Nonlinearity, make_grid
from .errors import DomainViolation, InvalidArgument, NoConvergence, PreconditionViolation
from .quadrature import (
    QuadResult,
    estimate_weight_ratio,
    forward_cumulative,
    moment_tail_integral,
    reverse_cumulative,
)
from .solution import SolutionCandidate, SolverDiagnostics
from .wronskian import Trajectory


@dataclass(frozen=True)
class MonotoneProblem:
    coeff: Coefficient
    w: Nonlinearity
    c: float
    d: float
    tol: float = 1e-12
    horizon: float = 1e4
    density: float = 2000.0
    band: float = 1e-13

    def __post_init__(self):
        if not self.c > 0:
            raise InvalidArgument("c must be positive")
        if not self.d > 0:
            raise InvalidArgument("d must be positive")
        if not self.tol > 0:
            raise InvalidArgument("tol must be positive")
        if not self.horizon > self.coeff.domain_start:
            raise InvalidArgument("horizon must exceed the coefficient domain start")

    @property
    def t0(self) -> float:
        return self.coeff.domain_start

    @property
    def w_cd(self) -> float:
        return float(self.w.func(np.array([self.c + self.d]))[0])

    @property
    def threshold(self) -> float:
        return self.d / self.w_cd

    def grid(self) -> np.ndarray:
        return make_grid(self.t0, self.horizon, self.density, self.coeff.points(self.t0, self.horizon))


def _growth(w: Nonlinearity, t: float) -> tuple[float, float]:
    """``(kappa, m)`` with ``|w(s)| <= kappa s^(2 - m)`` for s >= t.

    A Lipschitz w with w(0) = 0 grows at most linearly (m = 1); otherwise a
    quadratic envelope is sampled and an unbounded ratio raises
    :class:`InvalidWeight`.
    """
    if w.is_lipschitz:
        return w.lipschitz_k, 1.0
    return estimate_weight_ratio(lambda s: w.func(s) / s, t), 0.0


def weighted_first_moment_tail(coeff: Coefficient, w: Nonlinearity, t: float, tol: float,
                               slope: float = 1.0) -> QuadResult:
    """``int_t^inf a(s) w(slope s) ds`` with certified truncation."""
    kappa, m = _growth(w, t)
    w_slope = float(w.func(np.array([slope]))[0]) if slope != 1.0 else 1.0
    if w.is_lipschitz:
        factor = kappa * abs(slope)
    else:
        factor = kappa * max(w_slope, 1.0) if w.is_positive_submultiplicative else kappa * slope**2
    return moment_tail_integral(coeff, lambda s: coeff.func(s) * w.func(slope * s), t, tol, factor, m)


@dataclass(frozen=True)
class GateReport:
    passed: bool
    certified: bool
    integral: float
    budget: float
    threshold: float
    checks: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "certified": self.certified,
            "integral": self.integral,
            "budget": self.budget,
            "threshold": self.threshold,
            **self.checks,
        }


def check_theorem5_hypotheses(prob: MonotoneProblem, tol: float = 1e-12) -> GateReport:
    """Sign of a on the solver grid, flags of w, and the smallness integral.

    ``passed`` means the integral is at most the threshold within its error
    budget (so the boundary case counts); ``certified`` means it is below the
    threshold even after adding the budget.
    """
    t = prob.grid()
    a = prob.coeff.func(t)
    nonneg = bool(np.all(a >= 0))
    w = prob.w
    checks = {
        "a_nonnegative": nonneg,
        "a_zero_fraction": float(np.mean(a == 0)),
        "w_nondecreasing": bool(w.is_nondecreasing),
        "w_positive_submultiplicative": bool(w.is_positive_submultiplicative),
        "w_c_plus_d": prob.w_cd,
    }
    if not (w.is_nondecreasing and w.is_positive_submultiplicative):
        return GateReport(False, False, math.nan, math.nan, prob.threshold, checks)
    res = weighted_first_moment_tail(prob.coeff, w, prob.t0, tol)
    integral, budget = res.value, res.budget
    passed = nonneg and integral - budget <= prob.threshold
    certified = nonneg and integral + budget <= prob.threshold
    return GateReport(bool(passed), bool(certified), integral, budget, prob.threshold, checks)


# --------------------------------------------------------------------------- #
# The monotone operator
# --------------------------------------------------------------------------- #


@dataclass
class _Workspace:
    t: np.ndarray
    a: np.ndarray
    prob: MonotoneProblem

    def far_tail(self, u_end: float) -> float:
        """``int_T^inf a w(s u(T)/T) ds``, continuing u along its last ray."""
        T = float(self.t[-1])
        return weighted_first_moment_tail(self.prob.coeff, self.prob.w, T, 1e-3 * self.prob.tol,
                                          slope=u_end / T).value


def _workspace(prob: MonotoneProblem, t: np.ndarray) -> _Workspace:
    return _Workspace(t, prob.coeff.func(t), prob)


def _apply(ws: _Workspace, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    t, a, prob = ws.t, ws.a, ws.prob
    wu = prob.w.func(u)
    F = forward_cumulative(t, t * a * wu)
    tail = reverse_cumulative(t, a * wu) + ws.far_tail(float(u[-1]))
    return t * (prob.c + F / t + tail), F


def _in_D(t: np.ndarray, u: np.ndarray, prob: MonotoneProblem, slack: float = 1e-12) -> bool:
    r = u / t
    return bool(np.all(r >= prob.c * (1 - slack)) and np.all(r <= (prob.c + prob.d) * (1 + slack)))


def apply_V_monotone(u: GridFunction, prob: MonotoneProblem) -> GridFunction:
    """One application of V on the grid of ``u`` (single forward and reverse pass)."""
    t = u.abscissae
    if not _in_D(t, u.values, prob):
        raise DomainViolation("u is outside the order interval c t <= u <= (c + d) t")
    v, _ = _apply(_workspace(prob, t), u.values)
    return GridFunction(t, v)


def knaster_iterate(
    prob: MonotoneProblem,
    max_iter: int = 500,
    grid: np.ndarray | None = None,
    check_gate_first: bool = True,
) -> SolutionCandidate:
    """Iterate ``u_{n+1} = V(u_n)`` from ``u_0 = c t`` until ``sup |u_{n+1} - u_n|/t <= tol``.

    The trajectory is ``x = u*``, ``x' = u*/t - F/t`` with
    ``F(t) = int_{t0}^t tau a w(u*)``, so ``W(x, t0) = 0`` holds exactly.
    ``budget`` bounds ``|u - u*|/t`` from the grid error (coarse-grid
    comparison), the continuation beyond the horizon and the last step.
    """
    gate = None
    if check_gate_first:
        gate = check_theorem5_hypotheses(prob)
        if not gate.passed:
            raise PreconditionViolation(
                f"gate fails: integral {gate.integral:.6g} > threshold {gate.threshold:.6g}"
            )
    t = prob.grid() if grid is None else np.asarray(grid, dtype=float)
    ws = _workspace(prob, t)
    u = prob.c * t
    deltas: list[float] = []
    monotone = True
    worst_drop = 0.0
    in_D = True
    converged = False
    for _ in range(max_iter):
        u_new, _ = _apply(ws, u)
        drop = float(np.max((u - u_new) / t))
        worst_drop = max(worst_drop, drop)
        if drop > 1e-14 * (prob.c + prob.d):
            monotone = False
        in_D = in_D and _in_D(t, u_new, prob)
        delta = float(np.max(np.abs(u_new - u) / t))
        deltas.append(delta)
        u_prev, u = u, u_new
        if delta <= prob.tol:
            converged = True
            break
    if not converged:
        raise NoConvergence(f"no convergence in {max_iter} iterations (delta={deltas[-1]:.3g})",
                            last=GridFunction(t, u), previous=GridFunction(t, u_prev))

    v, F = _apply(ws, u)
    residual = float(np.max(np.abs(v - u) / t))
    x = u
    xp = u / t - F / t
    xp[0] = u[0] / t[0]

    # error budget on u/t
    idx = np.arange(0, t.size, 2)
    if idx[-1] != t.size - 1:
        idx = np.append(idx, t.size - 1)
    coarse = _Workspace(t[idx], ws.a[idx], prob)
    vc, _ = _apply(coarse, u[idx])
    disc = np.interp(t, t[idx], np.abs(v[idx] - vc) / t[idx])
    far_bound = prob.w_cd * weighted_first_moment_tail(prob.coeff, prob.w, float(t[-1]), 1e-3 * prob.tol).value
    budget = disc + far_bound + deltas[-1]

    diag = SolverDiagnostics(
        iterations=len(deltas),
        converged=True,
        deltas=tuple(deltas),
        truncation_error=far_bound,
        monotone_ok=monotone,
        grid_size=int(t.size),
        horizon=float(t[-1]),
        extra={
            "worst_monotonicity_drop": worst_drop,
            "iterates_in_D": in_D,
            "fixed_point_residual": residual,
            "max_discretization": float(disc.max()),
            "gate": None if gate is None else gate.to_dict(),
        },
    )
    traj = Trajectory(GridFunction(t, x), GridFunction(t, xp), "fixed-point-reconstructed")
    return SolutionCandidate(
        kind="monotone",
        c=prob.c,
        fixed_point=GridFunction(t, u),
        trajectory=traj,
        wronskian=GridFunction(t, xp - x / t),
        diagnostics=diag,
        budget=GridFunction(t, budget),
        problem=prob,
    )


# --------------------------------------------------------------------------- #
# Verification of the band and the limits
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class BandReport:
    band_ok: bool
    strict_ok: bool
    nonstrict_windows: list
    W0: float
    W0_ok: bool
    ratio_defect: float
    slope_defect: float
    horizon_bound: float
    limit_ok: bool
    defects_decreasing: bool
    min_ratio: float
    max_ratio: float
    min_slope: float

    @property
    def ok(self) -> bool:
        return self.band_ok and self.W0_ok and self.limit_ok

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__} | {"ok": self.ok}


def _runs(mask: np.ndarray, t: np.ndarray) -> list[tuple[float, float]]:
    m = np.concatenate([[False], mask, [False]]).astype(int)
    d = np.diff(m)
    return [(float(t[i]), float(t[j - 1])) for i, j in zip(np.flatnonzero(d == 1), np.flatnonzero(d == -1))]


def verify_band_and_limits(sol: SolutionCandidate, prob: MonotoneProblem, limit_tol: float = 1e-4) -> BandReport:
    """Check ``c - d <= x' < x/t <= c + d`` for t > t0, ``W(x, t0) = 0`` and the limits at the horizon.

    Where ``x/t - x'`` lies inside the zero band the strict inequality is
    downgraded to a non-strict one and the window is reported. The horizon
    bound is ``w(c+d) [(1/T) int_{t0}^T tau a w(tau) + int_T^inf a w]``,
    which dominates both ``x/T - c`` and ``x'(T) - c``.
    """
    t = sol.t
    x = sol.trajectory.x.values
    xp = sol.trajectory.x_prime.values
    ratio = x / t
    gap = ratio - xp
    budget = sol.budget.values if sol.budget is not None else np.zeros_like(t)
    c, d = prob.c, prob.d
    slack = budget + 1e-14 * (c + d)
    inner = slice(1, None)
    band_ok = bool(
        np.all(xp[inner] >= c - d - slack[inner])
        and np.all(xp[inner] <= ratio[inner] + slack[inner])
        and np.all(ratio >= c - slack)
        and np.all(ratio <= c + d + slack)
    )
    flat = gap[inner] <= prob.band
    windows = _runs(flat, t[inner])
    strict_ok = bool(band_ok and not flat.any())
    W0 = float(xp[0] - x[0] / t[0])

    T = float(t[-1])
    a = prob.coeff.func(t)
    first = forward_cumulative(t, t * a * prob.w.func(t))[-1] / T
    far = weighted_first_moment_tail(prob.coeff, prob.w, T, 1e-3 * prob.tol).value
    bound = prob.w_cd * (first + far)
    ratio_defect = abs(ratio[-1] - c)
    slope_defect = abs(xp[-1] - c)
    limit_ok = bool(ratio_defect <= limit_tol and slope_defect <= limit_tol
                    and ratio_defect <= bound + budget[-1])
    # defects shrink over the last decade of the grid
    last = t >= T / 10
    r_def = np.abs(ratio[last] - c)
    decreasing = bool(np.all(np.diff(r_def) <= 1e-14 + budget[last][1:]))
    return BandReport(
        band_ok=band_ok,
        strict_ok=strict_ok,
        nonstrict_windows=windows,
        W0=W0,
        W0_ok=W0 == 0.0,
        ratio_defect=float(ratio_defect),
        slope_defect=float(slope_defect),
        horizon_bound=float(bound),
        limit_ok=limit_ok,
        defects_decreasing=decreasing,
        min_ratio=float(ratio.min()),
        max_ratio=float(ratio.max()),
        min_slope=float(xp.min()),
    )


__all__ = [
    "MonotoneProblem",
    "GateReport",
    "BandReport",
    "weighted_first_moment_tail",
    "check_theorem5_hypotheses",
    "apply_V_monotone",
    "knaster_iterate",
    "verify_band_and_limits",
]
