"""Coefficient families with closed-form tails, used as exact oracles.

``make_exp_cos``
    a(t) = t^-2 e^-t cos t on [1, inf), whose weighted signed tail is
    S(t) = cos(t + pi/4) e^-t / sqrt(2) and whose absolute tail is below e^-t.

``make_triangular``
    a(t) = b(t) / t^2 where b is built from 9-unit cells of triangles with
    heights a_k = k^-alpha - (k+1)^-alpha. Tails are exact piecewise
    quadratics; at the checkpoints 9k+2 and 9k+6 they reduce to
    -a_k / a_k (signed) and 3a_k + 4(k+1)^-alpha / a_k + 4(k+1)^-alpha
    (absolute).
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .core import Coefficient, zero_coefficient
from .errors import InvalidArgument, PseudoWronskianError

_SQRT_HALF = math.sqrt(0.5)


# --------------------------------------------------------------------------- #
# exp-cos
# --------------------------------------------------------------------------- #


def _exp_cos(log_factor: float) -> Coefficient:
    L = float(log_factor)

    def a(t):
        return np.exp(L - t) * np.cos(t) / (t * t)

    def signed(t):
        return _SQRT_HALF * np.cos(t + math.pi / 4) * np.exp(L - t)

    def bound(t):
        return np.exp(L - t)

    def kinks(lo, hi):
        # zeros of cos t, where |a| has corners
        n0 = math.ceil((lo - math.pi / 2) / math.pi)
        n1 = math.floor((hi - math.pi / 2) / math.pi)
        pts = math.pi / 2 + math.pi * np.arange(n0, n1 + 1)
        return pts[(pts > lo) & (pts < hi)]

    return Coefficient(
        func=a,
        tail_bound=bound,
        domain_start=1.0,
        signed_tail=signed,
        breakpoints=kinks,
        name="exp-cos",
        log_envelope=lambda t: t,
        rescaler=lambda extra: _exp_cos(L + extra),
        params={"log_factor": L} if L else {},
    )


def make_exp_cos() -> Coefficient:
    """``a(t) = t**-2 * exp(-t) * cos(t)`` on ``[1, inf)``."""
    return _exp_cos(0.0)


# --------------------------------------------------------------------------- #
# Triangular cells
# --------------------------------------------------------------------------- #

# b / a_k on one cell, linear between the integer offsets 0..9
_PROFILE = np.array([0.0, 1.0, 0.0, -1.0, 0.0, -1.0, 0.0, 1.0, 0.0, 0.0])
_PROFILE_CUM = np.concatenate([[0.0], np.cumsum(0.5 * (_PROFILE[1:] + _PROFILE[:-1]))])
_ABS_PROFILE = np.abs(_PROFILE)
_ABS_PROFILE_CUM = np.concatenate([[0.0], np.cumsum(0.5 * (_ABS_PROFILE[1:] + _ABS_PROFILE[:-1]))])


def cell_height(k, alpha: int):
    """``a_k = k**-alpha - (k+1)**-alpha`` without cancellation for large k."""
    k = np.asarray(k, dtype=float)
    return -(k ** -alpha) * np.expm1(-alpha * np.log1p(1.0 / k))


def _cell_coords(t):
    t = np.asarray(t, dtype=float)
    k = np.floor(t / 9.0)
    u = t - 9.0 * k
    return k, u


def _piecewise_cum(profile, cum, u):
    j = np.clip(np.floor(u).astype(int), 0, 8)
    s = u - j
    p0, p1 = profile[j], profile[j + 1]
    return cum[j] + p0 * s + 0.5 * (p1 - p0) * s * s


def _tri_b(t, alpha):
    k, u = _cell_coords(t)
    active = k >= 1
    kk = np.where(active, k, 1.0)
    return np.where(active, cell_height(kk, alpha) * np.interp(u, np.arange(10.0), _PROFILE), 0.0)


def _tri_signed(t, alpha):
    k, u = _cell_coords(t)
    active = k >= 1
    kk = np.where(active, k, 1.0)
    # every full cell integrates to zero, so only the current cell contributes
    return np.where(active, -cell_height(kk, alpha) * _piecewise_cum(_PROFILE, _PROFILE_CUM, u), 0.0)


def _tri_abs(t, alpha):
    k, u = _cell_coords(t)
    active = k >= 1
    kk = np.where(active, k, 1.0)
    rest = cell_height(kk, alpha) * (4.0 - _piecewise_cum(_ABS_PROFILE, _ABS_PROFILE_CUM, u))
    return np.where(active, rest + 4.0 * (kk + 1.0) ** -alpha, 4.0)


def make_triangular(alpha: int) -> Coefficient:
    """Cell-structured coefficient ``a(t) = b(t) / t**2`` with integer exponent ``alpha``.

    ``b`` vanishes on ``[1, 9]``; the first cell is ``[9, 18]``. Breakpoints
    are every integer from 9 on: the corners of ``b`` plus the zeros at
    ``9k+2`` and ``9k+6`` where ``|b|`` has corners.
    """
    if isinstance(alpha, bool) or int(alpha) != alpha or alpha < 1:
        raise InvalidArgument(f"alpha must be an integer >= 1, got {alpha!r}")
    alpha = int(alpha)

    def kinks(lo, hi):
        start = max(9, math.floor(lo) + 1)
        stop = math.ceil(hi)
        pts = np.arange(start, stop, dtype=float)
        return pts[(pts > lo) & (pts < hi)]

    return Coefficient(
        func=lambda t: _tri_b(t, alpha) / (t * t),
        tail_bound=lambda t: _tri_abs(t, alpha),
        domain_start=1.0,
        signed_tail=lambda t: _tri_signed(t, alpha),
        abs_tail=lambda t: _tri_abs(t, alpha),
        breakpoints=kinks,
        name=f"tri-cells:alpha={alpha}",
        checkpoints=lambda k: (9.0 * k + 2.0, 9.0 * k + 6.0),
        params={"alpha": alpha},
    )


def triangular_profile(coeff: Coefficient, t):
    """``b(t) = t**2 a(t)`` evaluated exactly (no division round trip)."""
    return _tri_b(t, _alpha_of(coeff))


def _alpha_of(coeff: Coefficient) -> int:
    try:
        return int(coeff.params["alpha"])
    except KeyError:
        raise InvalidArgument(f"{coeff.name} is not a triangular-cell coefficient") from None


def triangular_checkpoint_tails(coeff: Coefficient, k: int) -> tuple[float, float, float, float]:
    """Closed-form tails at the cell checkpoints.

    Returns ``(signed(9k+2), abs(9k+2), signed(9k+6), abs(9k+6))`` using
    ``sum_{m>k} a_m = (k+1)**-alpha``.
    """
    if k < 1:
        raise InvalidArgument("cell index k must be >= 1")
    alpha = _alpha_of(coeff)
    ak = float(cell_height(k, alpha))
    rest = 4.0 * (k + 1.0) ** -alpha
    return -ak, 3.0 * ak + rest, ak, ak + rest


def triangular_ratio_sequence(alpha: int, ks: Sequence[int] | np.ndarray):
    """Closed-form indicator ratios ``R(9k+6)`` and ``R(9k+2)`` for each k."""
    k = np.asarray(ks, dtype=float)
    ak = cell_height(k, alpha)
    rest = 4.0 * (k + 1.0) ** -alpha
    r_plus = (9.0 * k + 6.0) * ak / (ak + rest)
    r_minus = (9.0 * k + 2.0) * (-ak) / (3.0 * ak + rest)
    return r_plus, r_minus


@dataclass(frozen=True)
class TriangularLimits:
    L_plus: float
    L_minus: float
    ks: np.ndarray
    ratios_plus: np.ndarray
    ratios_minus: np.ndarray

    def __iter__(self):
        yield self.L_plus
        yield self.L_minus


def triangular_L_limits(alpha: int, K: int = 1000, rtol: float = 0.05) -> TriangularLimits:
    """Limits ``(9 alpha / 4, -9 alpha / 4)`` of the indicator ratio, with a convergence check.

    The ratio sequence is evaluated at ``k = 1 .. K`` from closed forms and the
    last entries must lie within ``rtol`` of the limits. Unpacks as
    ``L_plus, L_minus``.
    """
    if alpha < 1:
        raise InvalidArgument("alpha must be >= 1")
    lim = 9.0 * alpha / 4.0
    ks = np.arange(1, K + 1)
    r_plus, r_minus = triangular_ratio_sequence(alpha, ks)
    if abs(r_plus[-1] - lim) > rtol * lim or abs(r_minus[-1] + lim) > rtol * lim:
        raise PseudoWronskianError(
            f"ratio sequence not within {rtol:g} of +-{lim:g} at k={K}: {r_plus[-1]:g}, {r_minus[-1]:g}"
        )
    return TriangularLimits(lim, -lim, ks, r_plus, r_minus)


# --------------------------------------------------------------------------- #
# Simple positive families (monotone-solver scenarios)
# --------------------------------------------------------------------------- #


def make_power(exponent: float, scale: float = 1.0, t0: float = 1.0) -> Coefficient:
    """``a(t) = scale * t**-exponent``; needs ``exponent > 3`` for a finite weighted tail."""
    if exponent <= 3:
        raise InvalidArgument("exponent must exceed 3 so that int t^2 |a| converges")
    e, c = float(exponent), float(scale)

    def tail(t):
        return abs(c) * np.asarray(t, dtype=float) ** (3.0 - e) / (e - 3.0)

    return Coefficient(
        func=lambda t: c * np.asarray(t, dtype=float) ** -e,
        tail_bound=tail,
        domain_start=t0,
        signed_tail=lambda t: np.sign(c) * tail(t),
        abs_tail=tail,
        name=f"power:exponent={e:g},scale={c:g}",
        params={"exponent": e, "scale": c},
    )


def make_exponential(rate: float = 1.0, scale: float = 1.0, t0: float = 1.0) -> Coefficient:
    """``a(t) = scale * exp(-rate * t)``."""
    if rate <= 0:
        raise InvalidArgument("rate must be positive")
    r, c = float(rate), float(scale)

    def tail(t):
        t = np.asarray(t, dtype=float)
        return abs(c) * np.exp(-r * t) * (t * t / r + 2.0 * t / r**2 + 2.0 / r**3)

    return Coefficient(
        func=lambda t: c * np.exp(-r * np.asarray(t, dtype=float)),
        tail_bound=tail,
        domain_start=t0,
        signed_tail=lambda t: np.sign(c) * tail(t),
        abs_tail=tail,
        name=f"exp:rate={r:g},scale={c:g}",
        log_envelope=lambda t: r * t,
        params={"rate": r, "scale": c},
    )


def tabulated_coefficient(t: Sequence[float], a: Sequence[float], name: str = "table") -> Coefficient:
    """Piecewise-linear coefficient through samples, zero beyond the last sample.

    The tail bound dominates ``s**2 |a|`` on each segment by its right-end
    value, so it is a certified (if loose) envelope.
    """
    ts = np.asarray(t, dtype=float)
    vals = np.asarray(a, dtype=float)
    if ts.size < 2 or ts.shape != vals.shape or np.any(np.diff(ts) <= 0):
        raise InvalidArgument("need at least two samples with strictly increasing t")
    if ts[0] < 1.0:
        raise InvalidArgument("tabulated coefficient must start at t >= 1")
    seg = np.diff(ts) * ts[1:] ** 2 * np.maximum(np.abs(vals[1:]), np.abs(vals[:-1]))
    node_bound = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])

    def func(s):
        s = np.asarray(s, dtype=float)
        return np.where(s <= ts[-1], np.interp(s, ts, vals), 0.0)

    def bound(s):
        s = np.asarray(s, dtype=float)
        i = np.clip(np.searchsorted(ts, s, side="right") - 1, 0, ts.size - 1)
        return np.where(s >= ts[-1], 0.0, node_bound[i])

    # sign changes inside segments are corners of |a|
    sc = np.flatnonzero(vals[:-1] * vals[1:] < 0)
    roots = ts[sc] + (ts[sc + 1] - ts[sc]) * vals[sc] / (vals[sc] - vals[sc + 1])
    pts = np.union1d(ts, roots)

    return Coefficient(func=func, tail_bound=bound, domain_start=float(ts[0]),
                       breakpoints=pts, name=name)


# --------------------------------------------------------------------------- #
# Presets
# --------------------------------------------------------------------------- #


def _parse_kv(text: str) -> dict[str, float]:
    out = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "=" not in part:
            raise InvalidArgument(f"expected key=value in preset parameters, got {part!r}")
        key, val = part.split("=", 1)
        out[key.strip()] = float(val)
    return out


def coefficient_from_preset(spec: str) -> Coefficient:
    """Build a coefficient from a preset name.

    Known presets: ``exp-cos``, ``tri-cells:alpha=<n>``,
    ``power:exponent=<e>[,scale=<s>]``, ``exp:rate=<r>[,scale=<s>]``, ``zero``.
    """
    name, _, rest = spec.strip().partition(":")
    kv = _parse_kv(rest)
    if name == "exp-cos":
        return make_exp_cos()
    if name == "tri-cells":
        if "alpha" not in kv:
            raise InvalidArgument("tri-cells preset needs alpha=<n>")
        return make_triangular(kv["alpha"])
    if name == "power":
        return make_power(kv.get("exponent", 4.0), kv.get("scale", 1.0))
    if name == "exp":
        return make_exponential(kv.get("rate", 1.0), kv.get("scale", 1.0))
    if name == "zero":
        return zero_coefficient()
    raise InvalidArgument(f"unknown coefficient preset {spec!r}")
