"""Independent forward-integration oracle for ``x'' + a(t) w(x) = 0``.

Uses the Dormand-Prince 5(4) pair from SciPy with dense output. Coefficient
breakpoints are forced step endpoints. Nothing here touches the quadrature
code path of the fixed-point solvers, so agreement is a genuine cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.integrate import solve_ivp

from .core import Coefficient, GridFunction, Nonlinearity, make_grid
from .errors import IntegrationFailure, InvalidArgument
from .wronskian import Trajectory


@dataclass(frozen=True)
class RKConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    horizon: float = 20.0

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0 and self.max_step > 0):
            raise InvalidArgument("RK tolerances and max_step must be positive")


def rk_integrate(
    coeff: Coefficient,
    w: Nonlinearity,
    x0: float,
    xp0: float,
    t0: float,
    cfg: RKConfig = RKConfig(),
    grid: np.ndarray | None = None,
) -> Trajectory:
    """Integrate forward from ``(x(t0), x'(t0))`` and resample onto ``grid``.

    The default grid is log-uniform with 500 nodes per unit of ln t (uniform
    when ``t0 <= 0``).
    """
    if not cfg.horizon > t0:
        raise InvalidArgument(f"horizon {cfg.horizon} must exceed t0 {t0}")
    if grid is None:
        grid = (make_grid(t0, cfg.horizon, 500.0) if t0 > 0
                else np.linspace(t0, cfg.horizon, 2001))
    grid = np.asarray(grid, dtype=float)
    if grid[0] < t0 - 1e-12 * max(1.0, abs(t0)) or grid[-1] > cfg.horizon * (1 + 1e-12):
        raise InvalidArgument("analysis grid must lie inside [t0, horizon]")

    def rhs(t, y):
        return [y[1], -float(coeff.func(np.array([t]))[0]) * float(w.func(np.array([y[0]]))[0])]

    stops = np.concatenate([[t0], coeff.points(t0, cfg.horizon), [cfg.horizon]])
    x = np.empty_like(grid)
    xp = np.empty_like(grid)
    state = np.array([x0, xp0], dtype=float)
    for lo, hi in zip(stops[:-1], stops[1:]):
        sol = solve_ivp(rhs, (lo, hi), state, method="RK45", rtol=cfg.rel_tol,
                        atol=cfg.abs_tol, max_step=cfg.max_step, dense_output=True)
        if sol.status != 0:
            raise IntegrationFailure(f"RK integration stopped at t={sol.t[-1]:g}: {sol.message}",
                                     t_last=float(sol.t[-1]), state=sol.y[:, -1].copy())
        mask = (grid >= lo) & (grid <= hi)
        if mask.any():
            vals = sol.sol(grid[mask])
            x[mask], xp[mask] = vals[0], vals[1]
        state = sol.y[:, -1]
    # exact initial data at t0 (dense output reproduces it only to rounding)
    if grid[0] == t0:
        x[0], xp[0] = x0, xp0
    return Trajectory(GridFunction(grid, x), GridFunction(grid, xp), "rk-integrated")


def agreement(fixed: Trajectory, rk: Trajectory, norm: Literal["sup", "scaled-sup"] = "sup") -> float:
    """``sup |x_fixed - x_rk|`` (optionally divided by t) over the common time range."""
    lo = max(fixed.x.start, rk.x.start)
    hi = min(fixed.x.end, rk.x.end)
    if hi < lo:
        raise InvalidArgument("trajectories have disjoint time ranges")
    t = fixed.t[(fixed.t >= lo) & (fixed.t <= hi)]
    if t.size == 0:
        t = np.array([lo, hi])
    diff = np.abs(fixed.x(t) - rk.x(t))
    if norm == "scaled-sup":
        diff = diff / t
    elif norm != "sup":
        raise InvalidArgument(f"unknown norm {norm!r}")
    return float(diff.max())


def anchored_agreements(
    coeff: Coefficient,
    w: Nonlinearity,
    fixed: Trajectory,
    anchors: list[float],
    cfg: RKConfig,
) -> dict[float, float]:
    """Agreement of RK runs restarted from the fixed trajectory at each anchor time."""
    out = {}
    for t1 in anchors:
        x1 = float(fixed.x(t1))
        xp1 = float(fixed.x_prime(t1))
        grid = fixed.t[(fixed.t >= t1) & (fixed.t <= cfg.horizon)]
        if grid.size == 0 or grid[0] != t1:
            grid = np.concatenate([[t1], grid[grid > t1]])
        rk = rk_integrate(coeff, w, x1, xp1, t1, cfg, grid=grid)
        out[float(t1)] = agreement(fixed, rk)
    return out
