"""Adaptive quadrature with certified truncation of semi-infinite tails.

Finite integrals use a vectorized, globally-refined Gauss-Kronrod (7, 15)
scheme: every panel is evaluated at once, panels whose embedded error
estimate exceeds their share of the tolerance are bisected, and the loop
repeats. Tail integrals ``int_t^inf`` are cut at the smallest horizon where
the coefficient's tail-bound envelope drops below half the tolerance.

All tolerances are absolute.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .core import Coefficient, GridFunction
from .errors import HorizonExhausted, InvalidArgument, InvalidWeight, QuadratureFailure

# Kronrod 15-point abscissae on [0, 1) (symmetric), Kronrod and Gauss weights
_XK_HALF = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK_HALF = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG_HALF = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_XK = np.concatenate([-_XK_HALF[:-1], _XK_HALF[::-1]])
_WK = np.concatenate([_WK_HALF[:-1], _WK_HALF[::-1]])
_WG = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes of the half table
_WG[[1, 3, 5]] = _WG_HALF[:3]
_WG[7] = _WG_HALF[3]
_WG[[9, 11, 13]] = _WG_HALF[2::-1]

_EPS = np.finfo(float).eps

DEFAULT_MAX_EVALS = 4_000_000
DEFAULT_MAX_HORIZON = 1e8


@dataclass(frozen=True)
class QuadResult:
    """An integral estimate with separately reported error sources.

    ``error_estimate`` bounds the finite-interval quadrature error and
    ``truncation_error`` bounds the discarded ``[t_max, inf)`` tail.
    """

    value: float
    error_estimate: float
    truncation_error: float = 0.0
    evaluations: int = 0
    t_max: float | None = None
    reference: float | None = None

    @property
    def budget(self) -> float:
        return self.error_estimate + self.truncation_error

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "error_estimate": self.error_estimate,
            "truncation_error": self.truncation_error,
            "evaluations": self.evaluations,
            "t_max": self.t_max,
            "reference": self.reference,
        }


def _gk_panels(f: Callable, a: np.ndarray, b: np.ndarray):
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    nodes = mid[:, None] + half[:, None] * _XK[None, :]
    vals = np.asarray(f(nodes.ravel()), dtype=float).reshape(nodes.shape)
    kron = half * (vals @ _WK)
    gauss = half * (vals @ _WG)
    resabs = np.abs(half) * (np.abs(vals) @ _WK)
    floor = 50.0 * _EPS * resabs
    raw = np.abs(kron - gauss)
    return kron, np.maximum(raw, floor), raw <= floor


def finite_integral(
    f: Callable,
    lo: float,
    hi: float,
    tol: float,
    points=None,
    max_evals: int = DEFAULT_MAX_EVALS,
) -> QuadResult:
    """Integrate a vectorized ``f`` over ``[lo, hi]`` to absolute tolerance ``tol``.

    ``points`` are mandatory subdivision points (corners of piecewise
    integrands). On success ``error_estimate <= tol``; when the evaluation
    budget runs out a :class:`QuadratureFailure` carrying the best estimate
    is raised.
    """
    lo, hi = float(lo), float(hi)
    if not hi >= lo:
        raise InvalidArgument(f"need lo <= hi, got [{lo}, {hi}]")
    if not tol > 0:
        raise InvalidArgument("tol must be positive")
    if hi == lo:
        return QuadResult(0.0, 0.0)
    edges = np.array([lo, hi])
    if points is not None:
        pts = np.asarray(points, dtype=float).ravel()
        pts = pts[(pts > lo) & (pts < hi)]
        edges = np.union1d(edges, pts)
    a, b = edges[:-1], edges[1:]
    length = hi - lo
    total = 0.0
    total_err = 0.0
    evals = 0
    min_width = 1e-13 * max(abs(lo), abs(hi), length)
    while a.size:
        kron, err, at_floor = _gk_panels(f, a, b)
        evals += 15 * a.size
        width = b - a
        share = tol * width / length
        # bisecting a roundoff-limited panel cannot improve it
        done = (err <= share) | at_floor | (width <= min_width)
        total += float(np.sum(kron[done]))
        total_err += float(np.sum(err[done]))
        a, b = a[~done], b[~done]
        if a.size and evals + 30 * a.size > max_evals:
            best = total + float(np.sum(kron[~done]))
            raise QuadratureFailure(
                f"evaluation budget {max_evals} exhausted on [{lo}, {hi}]",
                value=best,
                error_estimate=total_err + float(np.sum(err[~done])),
                evaluations=evals,
            )
        m = 0.5 * (a + b)
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
    if total_err > tol:
        raise QuadratureFailure(
            f"tolerance {tol:g} not reachable (roundoff floor {total_err:g})",
            value=total,
            error_estimate=total_err,
            evaluations=evals,
        )
    return QuadResult(total, total_err, 0.0, evals)


def truncation_horizon(
    bound: Callable,
    t: float,
    target: float,
    max_horizon: float = DEFAULT_MAX_HORIZON,
) -> float:
    """Smallest T >= t (to bisection accuracy) with ``bound(T) <= target``.

    Searches by doubling from ``t`` and then bisects the last doubling step.
    """
    t = float(t)
    if float(bound(t)) <= target:
        return t
    lo, hi = t, 2.0 * max(t, 1.0)
    while float(bound(hi)) > target:
        lo, hi = hi, 2.0 * hi
        if hi > max_horizon:
            raise HorizonExhausted(
                f"tail bound stays above {target:g} up to horizon {max_horizon:g}"
            )
    for _ in range(60):
        if hi - lo <= 1e-9 * hi:
            break
        mid = 0.5 * (lo + hi)
        if float(bound(mid)) <= target:
            hi = mid
        else:
            lo = mid
    return hi


def _tail(
    integrand: Callable,
    coeff: Coefficient,
    t: float,
    tol: float,
    bound_factor: float,
    t_max: float | None,
    max_horizon: float,
    decay_power: float = 0.0,
) -> QuadResult:
    if not tol > 0:
        raise InvalidArgument("tol must be positive")
    if t < coeff.domain_start:
        raise InvalidArgument(f"t={t} precedes the coefficient domain start {coeff.domain_start}")
    if bound_factor == 0.0:
        return QuadResult(0.0, 0.0, 0.0, 0, t_max=float(t))

    def remainder(T):
        return bound_factor * coeff.tail_bound(T) / T**decay_power

    if t_max is None:
        t_max = truncation_horizon(remainder, t, tol / 2, max_horizon)
    t_max = max(float(t_max), float(t))
    finite = finite_integral(integrand, t, t_max, tol / 2, points=coeff.points(t, t_max))
    trunc = float(remainder(t_max))
    return QuadResult(finite.value, finite.error_estimate, trunc, finite.evaluations, t_max=t_max)


def tail_integral_abs(
    coeff: Coefficient,
    t: float,
    tol: float,
    t_max: float | None = None,
    max_horizon: float = DEFAULT_MAX_HORIZON,
) -> QuadResult:
    """``int_t^inf s^2 |a(s)| ds`` with certified truncation."""
    res = _tail(lambda s: s * s * np.abs(coeff.func(s)), coeff, t, tol, 1.0, t_max, max_horizon)
    if coeff.abs_tail is not None:
        res = QuadResult(res.value, res.error_estimate, res.truncation_error, res.evaluations,
                         res.t_max, reference=float(coeff.abs_tail(t)))
    return res


def tail_integral_signed(
    coeff: Coefficient,
    t: float,
    tol: float,
    t_max: float | None = None,
    max_horizon: float = DEFAULT_MAX_HORIZON,
) -> QuadResult:
    """``int_t^inf s^2 a(s) ds``; the signed remainder is dominated by the absolute one."""
    res = _tail(lambda s: s * s * coeff.func(s), coeff, t, tol, 1.0, t_max, max_horizon)
    if coeff.signed_tail is not None:
        res = QuadResult(res.value, res.error_estimate, res.truncation_error, res.evaluations,
                         res.t_max, reference=float(coeff.signed_tail(t)))
    return res


def estimate_weight_ratio(weight: Callable, t: float, span: float = 1e6, n: int = 400) -> float:
    """Sampled ``sup |weight(s)| / s`` over ``[t, span * t]``.

    Raises :class:`InvalidWeight` when the ratio is not finite or is still
    growing over the last decade of the sample (no linear envelope).
    """
    s = np.geomspace(t, span * t, n)
    ratio = np.abs(np.asarray(weight(s), dtype=float)) / s
    if not np.all(np.isfinite(ratio)):
        raise InvalidWeight("weight is not finite on the sampled range")
    last = s >= span * t / 10
    head = float(ratio[~last].max())
    tail = float(ratio[last].max())
    if tail > 1.01 * head and tail > 1e-300:
        raise InvalidWeight(
            f"|weight(s)|/s keeps growing (max {head:g} before, {tail:g} over the last decade)"
        )
    return max(head, tail)


def weighted_tail_integral(
    coeff: Coefficient,
    weight: Callable,
    t: float,
    tol: float,
    kappa: float | None = None,
    t_max: float | None = None,
    max_horizon: float = DEFAULT_MAX_HORIZON,
) -> QuadResult:
    """``int_t^inf s * weight(s) * a(s) ds`` for a weight with ``|weight(s)| <= kappa * s``.

    The truncated remainder is certified by ``kappa * tail_bound(t_max)``.
    ``kappa`` is estimated by sampling when omitted.
    """
    if kappa is None:
        kappa = estimate_weight_ratio(weight, t)
    kappa = float(kappa)

    def integrand(s):
        return s * np.asarray(weight(s), dtype=float) * coeff.func(s)

    return _tail(integrand, coeff, t, tol, kappa, t_max, max_horizon)


def moment_tail_integral(
    coeff: Coefficient,
    integrand: Callable,
    t: float,
    tol: float,
    bound_factor: float,
    decay_power: float = 0.0,
    t_max: float | None = None,
    max_horizon: float = DEFAULT_MAX_HORIZON,
) -> QuadResult:
    """``int_t^inf integrand`` for ``|integrand(s)| <= bound_factor * s^(2 - decay_power) |a(s)|``.

    The remainder beyond the horizon is then at most
    ``bound_factor * tail_bound(T) / T^decay_power``.
    """
    return _tail(integrand, coeff, t, tol, bound_factor, t_max, max_horizon, decay_power)


# --------------------------------------------------------------------------- #
# Grid-level integration helpers
# --------------------------------------------------------------------------- #


def forward_cumulative(t: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Trapezoid ``int_{t[0]}^{t[i]} f`` at every node (first entry 0)."""
    seg = 0.5 * np.diff(t) * (f[1:] + f[:-1])
    return np.concatenate([[0.0], np.cumsum(seg)])


def reverse_cumulative(t: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Trapezoid ``int_{t[i]}^{t[-1]} f`` at every node, summed from the far end.

    Summing backwards keeps small tails accurate relative to their own size.
    """
    seg = 0.5 * np.diff(t) * (f[1:] + f[:-1])
    return np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])


def linear_abs_power_integral(g: GridFunction, p: float, lo: float | None = None, hi: float | None = None) -> float:
    """Exact ``int_lo^hi |g(s)|**p ds`` for the piecewise-linear interpolant of ``g``.

    Segments where the interpolant changes sign are split at the root, so
    the integrable cusp of ``|g|**p`` at a zero costs nothing.
    """
    if p <= 0:
        raise InvalidArgument("exponent must be positive")
    lo = g.start if lo is None else float(lo)
    hi = g.end if hi is None else float(hi)
    if hi <= lo:
        return 0.0
    t = g.abscissae
    inner = t[(t > lo) & (t < hi)]
    nodes = np.concatenate([[lo], inner, [hi]])
    vals = np.interp(nodes, t, g.values)
    h = np.diff(nodes)
    y0, y1 = vals[:-1], vals[1:]
    q = p + 1.0
    out = np.zeros_like(h)
    same = y0 * y1 >= 0
    a0, a1 = np.abs(y0[same]), np.abs(y1[same])
    diff = a1 - a0
    flat = np.abs(diff) <= 1e-14 * np.maximum(a0, a1)
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = h[same] * (a1**q - a0**q) / (q * diff)
    out[same] = np.where(flat, h[same] * 0.5 * (a0**p + a1**p), exact)
    cross = ~same
    if np.any(cross):
        b0, b1 = np.abs(y0[cross]), np.abs(y1[cross])
        frac = b0 / (b0 + b1)
        hc = h[cross]
        # |g| is linear from b0 down to 0 and from 0 up to b1 on the two parts
        out[cross] = (frac * hc) * b0**p / q + ((1 - frac) * hc) * b1**p / q
    return float(np.sum(out))


def integrate_on_grid(f: Callable, grid: np.ndarray, tol: float, points=None) -> QuadResult:
    """Adaptive integral over ``[grid[0], grid[-1]]`` with the grid nodes as panel edges."""
    pts = grid[1:-1] if points is None else np.union1d(grid[1:-1], points)
    return finite_integral(f, grid[0], grid[-1], tol, points=pts)


def gauss_legendre_on_panels(f: Callable, a: np.ndarray, b: np.ndarray, n: int = 15) -> np.ndarray:
    """Fixed n-point Gauss-Legendre integral on each panel ``[a_i, b_i]``."""
    x, w = np.polynomial.legendre.leggauss(n)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    nodes = mid[..., None] + half[..., None] * x
    vals = np.asarray(f(nodes.reshape(-1)), dtype=float).reshape(nodes.shape)
    return half * (vals @ w)


def log_sum(values: np.ndarray) -> float:
    """``log(sum(values))`` for nonnegative values, robust to a wide dynamic range."""
    v = np.asarray(values, dtype=float)
    v = v[v > 0]
    if not v.size:
        return -math.inf
    m = v.max()
    return math.log(m) + math.log(np.sum(v / m))
