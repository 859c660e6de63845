"""L^p membership of the pseudo-wronskian for p in (0, 1).

The fixed point of the contraction satisfies
``|y0(t)| <= k (|c| + eta) A(t) / t`` with ``A(t) = int_t^inf s^2 |a|``,
and integrating ``|y0|^p`` by parts gives

    int_t^T |y0|^p <= [k (|c| + eta)]^p (1+p)/(1-p) int_t^inf [s / A(s)]^(1-p) s^2 |a(s)| ds.

The right-hand integral (called the condition integral below) is finite
for the cell coefficient with ``alpha > (2 - p)/p`` and for the
exponentially damped one.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from .coefficients import _alpha_of
from .core import Coefficient, GridFunction
from .errors import InvalidArgument, OutOfRange
from .quadrature import (
    QuadResult,
    finite_integral,
    gauss_legendre_on_panels,
    linear_abs_power_integral,
    tail_integral_abs,
)
from .solution import SolutionCandidate

UNDERFLOW = 1e-290


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 < p < 1.0:
        raise InvalidArgument(f"p must lie in (0, 1), got {p}")
    return p


def underflow_cap(coeff: Coefficient, t0: float, limit: float) -> float:
    """First time (on a doubling scan) where the tail bound drops below the underflow floor."""
    t = float(t0)
    while t < limit:
        if float(coeff.tail_bound(t)) < UNDERFLOW:
            return t
        t *= 1.25
    return float(limit)


def abs_tail_function(coeff: Coefficient, lo: float, hi: float, tol: float = 1e-300) -> Callable:
    """``A(s) = int_s^inf u^2 |a(u)| du`` for ``s`` in ``[lo, hi]``, accurate to rounding.

    Uses the closed form when the coefficient has one. Otherwise A is
    accumulated from 15-point Gauss-Legendre panels between nodes that
    include every breakpoint and are at most 0.5 apart, and each query adds
    the partial panel up to the next node.
    """
    if coeff.abs_tail is not None:
        return lambda s: np.asarray(coeff.abs_tail(s), dtype=float)
    n = int(math.ceil((hi - lo) / 0.5)) + 1
    nodes = np.union1d(np.linspace(lo, hi, n), coeff.points(lo, hi))

    def f(s):
        return s * s * np.abs(coeff.func(s))

    panels = gauss_legendre_on_panels(f, nodes[:-1], nodes[1:])
    far = float(coeff.tail_bound(hi))
    rest = tail_integral_abs(coeff, hi, max(1e-6 * far, tol)).value if far > 0 else 0.0
    at_nodes = np.concatenate([np.cumsum(panels[::-1])[::-1], [0.0]]) + rest

    def A(s):
        s = np.asarray(s, dtype=float)
        if np.any(s < lo * (1 - 1e-12)) or np.any(s > hi * (1 + 1e-12)):
            raise OutOfRange("query outside the tabulated range of the absolute tail")
        j = np.clip(np.searchsorted(nodes, s, side="left"), 0, nodes.size - 1)
        right = nodes[j]
        part = gauss_legendre_on_panels(f, np.minimum(s, right), right)
        return at_nodes[j] + part

    return A


def _condition_integrand(coeff: Coefficient, A: Callable, p: float, flags: dict) -> Callable:
    def g(s):
        s = np.asarray(s, dtype=float)
        b = s * s * np.abs(coeff.func(s))
        As = A(s)
        out = np.zeros_like(s)
        live = b > 0
        ok = live & (As > 0)
        if np.any(live & ~ok):
            flags["capped"] = True
        with np.errstate(divide="ignore"):
            out[ok] = np.exp((1.0 - p) * (np.log(s[ok]) - np.log(As[ok])) + np.log(b[ok]))
        return out

    return g


@dataclass(frozen=True)
class Condition19Result(QuadResult):
    """Condition integral with its convergence evidence.

    ``last_decade_fraction`` is the share of the value picked up over the
    last decade ``[T/10, T]``; ``flattened`` compares it to the threshold.
    ``series_certified`` is set for cell coefficients whose per-cell bound
    forms a convergent series.
    """

    flattened: bool = False
    last_decade_fraction: float = math.nan
    capped: bool = False
    series_certified: bool | None = None
    decades: tuple = ()

    def to_dict(self) -> dict:
        return super().to_dict() | {
            "flattened": self.flattened,
            "last_decade_fraction": self.last_decade_fraction,
            "capped": self.capped,
            "series_certified": self.series_certified,
            "decades": [list(d) for d in self.decades],
        }


def _series_exponent(coeff: Coefficient, p: float) -> float | None:
    try:
        alpha = _alpha_of(coeff)
    except InvalidArgument:
        return None
    return (1.0 + alpha) * p - 1.0


def condition_19(
    coeff: Coefficient,
    p: float,
    tol: float = 1e-10,
    t_from: float | None = None,
    max_horizon: float = 1e5,
    flat_threshold: float = 1e-6,
) -> Condition19Result:
    """``int_t^T [s / A(s)]^(1-p) s^2 |a(s)| ds`` over growing decades of T.

    Decades are added until the last one contributes at most
    ``flat_threshold`` of the total, or until ``max_horizon`` (or the point
    where the tail bound underflows; past it the integrand is capped at 0).
    ``truncation_error`` extrapolates the decade contributions geometrically
    and is infinite when they are not shrinking.
    """
    p = _check_p(p)
    t0 = coeff.domain_start if t_from is None else float(t_from)
    if t0 < coeff.domain_start:
        raise InvalidArgument("t_from precedes the coefficient domain")
    cap = underflow_cap(coeff, t0, max_horizon)
    capped = cap < max_horizon
    A = abs_tail_function(coeff, t0, cap)
    flags = {"capped": False}
    g = _condition_integrand(coeff, A, p, flags)

    decades: list[tuple[float, float, float]] = []
    total = err = 0.0
    evals = 0
    lo = t0
    n_dec = max(1, int(math.ceil(math.log10(cap / t0))))
    for i in range(n_dec):
        hi = min(lo * 10.0, cap)
        piece = finite_integral(g, lo, hi, tol / n_dec, points=coeff.points(lo, hi))
        total += piece.value
        err += piece.error_estimate
        evals += piece.evaluations
        decades.append((lo, hi, piece.value))
        lo = hi
        if hi >= cap:
            break
        if total > 0 and piece.value <= flat_threshold * total and i >= 1:
            break
    last = decades[-1][2]
    frac = last / total if total > 0 else 0.0
    flattened = total == 0.0 or frac <= flat_threshold
    if len(decades) >= 2 and decades[-2][2] > 0 and last < decades[-2][2]:
        r = last / decades[-2][2]
        trunc = last * r / (1.0 - r)
    elif last == 0.0:
        trunc = 0.0
    else:
        trunc = math.inf
    if capped and trunc == math.inf:
        trunc = last
    expo = _series_exponent(coeff, p)
    return Condition19Result(
        value=total,
        error_estimate=err,
        truncation_error=trunc,
        evaluations=evals,
        t_max=decades[-1][1],
        flattened=bool(flattened),
        last_decade_fraction=float(frac),
        capped=bool(capped or flags["capped"]),
        series_certified=None if expo is None else bool(expo > 1.0),
        decades=tuple(decades),
    )


def theoretical_lp_bound(coeff: Coefficient, p: float, k: float, c: float, eta: float,
                         t: float, tol: float = 1e-10, **kw) -> float:
    """``[k (|c| + eta)]^p (1+p)/(1-p)`` times the condition integral from ``t``."""
    p = _check_p(p)
    res = condition_19(coeff, p, tol, t_from=t, **kw)
    return (k * (abs(c) + eta)) ** p * (1.0 + p) / (1.0 - p) * res.value


def empirical_lp_norm(y0: GridFunction, p: float, t_from: float | None = None) -> float:
    """``int_{t_from}^{T} |y0|^p`` for the piecewise-linear interpolant, integrated exactly."""
    p = _check_p(p)
    return linear_abs_power_integral(y0, p, t_from, None)


# --------------------------------------------------------------------------- #
# Cell series
# --------------------------------------------------------------------------- #


def cell_constant(alpha: int, p: float) -> float:
    """``9 (9/4)^(1-p) (2^alpha - 1)``."""
    return 9.0 * (9.0 / 4.0) ** (1.0 - p) * (2.0**alpha - 1.0)


def cell_bounds(alpha: int, p: float, ks) -> np.ndarray:
    """Per-cell bounds ``c_alpha (k+1)^(1 - (1+alpha) p)``."""
    k = np.asarray(ks, dtype=float)
    return cell_constant(alpha, p) * (k + 1.0) ** (1.0 - (1.0 + alpha) * p)


def cell_integrals(coeff: Coefficient, p: float, ks, tol: float = 1e-12) -> np.ndarray:
    """Condition integral restricted to each cell ``[9k, 9k+9]``."""
    p = _check_p(p)
    alpha = _alpha_of(coeff)
    A = abs_tail_function(coeff, 9.0, 9.0 * (max(ks) + 1))
    flags: dict = {}
    g = _condition_integrand(coeff, A, p, flags)
    out = []
    for k in ks:
        lo, hi = 9.0 * k, 9.0 * k + 9.0
        scale = float(cell_bounds(alpha, p, [k])[0])
        out.append(finite_integral(g, lo, hi, tol * scale, points=np.arange(lo + 1, hi)).value)
    return np.asarray(out)


def cell_height_bound(alpha: int, k) -> np.ndarray:
    """``(2^alpha - 1) (k+1)^-alpha``, which dominates ``a_k``."""
    return (2.0**alpha - 1.0) * (np.asarray(k, dtype=float) + 1.0) ** -alpha


# --------------------------------------------------------------------------- #
# Report
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class LpReport:
    p: float
    condition_integral: float
    theoretical_bound: float
    empirical_norm: float
    combined_budget: float
    passed: bool
    condition: Condition19Result
    envelope_ok: bool
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "condition_integral": self.condition_integral,
            "theoretical_bound": self.theoretical_bound,
            "empirical_norm": self.empirical_norm,
            "combined_budget": self.combined_budget,
            "pass": self.passed,
            "envelope_ok": self.envelope_ok,
            "condition": self.condition.to_dict(),
            **self.extra,
        }


def lp_report(sol: SolutionCandidate, p: float, tol: float = 1e-10, **kw) -> LpReport:
    """Compare ``int |y0|^p`` on the solver grid with the explicit bound.

    The empirical budget uses ``| |y|^p - |y*|^p | <= |y - y*|^p`` with the
    solver's node budget for ``t |y - y*|``. The envelope check tests
    ``t |y0| <= k (|c| + eta) A(t)`` at every node within that budget.
    """
    p = _check_p(p)
    prob = sol.problem
    coeff, k, c, eta = prob.coeff, prob.k, prob.c, prob.eta
    t = sol.t
    cond = condition_19(coeff, p, tol, t_from=float(t[0]), **kw)
    factor = (k * (abs(c) + eta)) ** p * (1.0 + p) / (1.0 - p)
    bound = factor * cond.value
    emp = empirical_lp_norm(sol.fixed_point, p)
    node_budget = sol.budget.values if sol.budget is not None else np.zeros_like(t)
    emp_budget = linear_abs_power_integral(GridFunction(t, node_budget / t), p)
    combined = emp_budget + factor * cond.budget
    A = abs_tail_function(coeff, float(t[0]), float(t[-1]))(t)
    envelope = bool(np.all(t * np.abs(sol.fixed_point.values) <= k * (abs(c) + eta) * A + node_budget))
    return LpReport(
        p=p,
        condition_integral=cond.value,
        theoretical_bound=bound,
        empirical_norm=emp,
        combined_budget=combined,
        passed=bool(emp <= bound + combined),
        condition=cond,
        envelope_ok=envelope,
        extra={"empirical_budget": emp_budget, "horizon": float(t[-1])},
    )


__all__ = [
    "Condition19Result",
    "LpReport",
    "abs_tail_function",
    "condition_19",
    "theoretical_lp_bound",
    "empirical_lp_norm",
    "cell_constant",
    "cell_bounds",
    "cell_integrals",
    "cell_height_bound",
    "lp_report",
]
