"""Pseudo-wronskian W(x, t) = x'(t) - x(t)/t: evaluation, sign structure, oscillation.

Three routes to W are available: directly from a trajectory
(:func:`pseudo_wronskian`), through the variation-of-constants formula
(:func:`wronskian_voc`), and, for fixed-point solutions, as the fixed point
itself. The first two agree along true solutions, which the tests exploit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.optimize import brentq

from .core import Coefficient, GridFunction, Nonlinearity
from .errors import InvalidArgument, PreconditionViolation
from .quadrature import finite_integral, gauss_legendre_on_panels

PROVENANCES = ("fixed-point-reconstructed", "rk-integrated", "user-supplied")

Concavity = Literal["nonpositive", "nonnegative"]


@dataclass(frozen=True)
class Trajectory:
    """A sampled solution x together with its derivative on the same grid."""

    x: GridFunction
    x_prime: GridFunction
    provenance: str = "user-supplied"

    def __post_init__(self):
        if not np.array_equal(self.x.abscissae, self.x_prime.abscissae):
            raise InvalidArgument("x and x_prime must share abscissae")
        if self.provenance not in PROVENANCES:
            raise InvalidArgument(f"unknown provenance {self.provenance!r}")

    @property
    def t(self) -> np.ndarray:
        return self.x.abscissae

    @property
    def t0(self) -> float:
        return self.x.start

    def scaled(self, lam: float) -> Trajectory:
        return Trajectory(self.x.scaled(lam), self.x_prime.scaled(lam), self.provenance)

    def consistency_defect(self) -> float:
        """Largest amount by which a secant slope escapes the range of x' at its ends.

        Zero for a consistent trajectory up to the grid resolution.
        """
        t = self.t
        if t.size < 2:
            return 0.0
        slope = np.diff(self.x.values) / np.diff(t)
        xp = self.x_prime.values
        lo = np.minimum(xp[:-1], xp[1:])
        hi = np.maximum(xp[:-1], xp[1:])
        excess = np.maximum(lo - slope, slope - hi)
        return float(max(excess.max(), 0.0))


@dataclass(frozen=True)
class WronskianScalars:
    """Scalar parameters of a scenario, validated once."""

    W0: float = 0.0
    c1: float = 0.0
    c2: float = 0.0
    c: float = 1.0
    eta: float = 1.0
    d: float = 1.0
    p: float = 0.5
    alpha: int = 4
    lam: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise InvalidArgument("p must lie in (0, 1)")
        if not self.eta > 0:
            raise InvalidArgument("eta must be positive")
        if not self.d > 0:
            raise InvalidArgument("d must be positive")


@dataclass(frozen=True)
class OscillationReport:
    """Zeros of W and strict-sign witnesses interleaved between them."""

    zeros: np.ndarray
    positive_witnesses: np.ndarray
    negative_witnesses: np.ndarray
    positive_values: np.ndarray
    negative_values: np.ndarray
    interleaving_ok: bool
    count: int
    horizon: float
    details: dict = field(default_factory=dict)

    @property
    def n_pairs(self) -> int:
        return int(min(self.positive_witnesses.size, self.negative_witnesses.size))

    def swapped(self) -> OscillationReport:
        """The report for -W: witness lists trade places."""
        det = dict(self.details)
        for suffix, flip in (("lhs", -1.0), ("lhs_scaled", -1.0), ("budget", 1.0)):
            a, b = f"positive_{suffix}", f"negative_{suffix}"
            if a in det or b in det:
                pa, pb = det.get(a), det.get(b)
                det[a] = None if pb is None else flip * np.asarray(pb)
                det[b] = None if pa is None else flip * np.asarray(pa)
        return OscillationReport(
            zeros=self.zeros,
            positive_witnesses=self.negative_witnesses,
            negative_witnesses=self.positive_witnesses,
            positive_values=-self.negative_values,
            negative_values=-self.positive_values,
            interleaving_ok=self.interleaving_ok,
            count=self.count,
            horizon=self.horizon,
            details=det,
        )

    def to_dict(self) -> dict:
        out = {
            "zeros": self.zeros.tolist(),
            "positive_witnesses": self.positive_witnesses.tolist(),
            "negative_witnesses": self.negative_witnesses.tolist(),
            "positive_values": self.positive_values.tolist(),
            "negative_values": self.negative_values.tolist(),
            "interleaving_ok": self.interleaving_ok,
            "count": self.count,
            "horizon": self.horizon,
            "n_pairs": self.n_pairs,
        }
        for key, val in self.details.items():
            out[key] = val.tolist() if isinstance(val, np.ndarray) else val
        return out


# --------------------------------------------------------------------------- #
# W along a trajectory
# --------------------------------------------------------------------------- #


def pseudo_wronskian(traj: Trajectory) -> GridFunction:
    """``x'(t) - x(t)/t`` on the trajectory grid."""
    if traj.t0 < 1.0:
        raise PreconditionViolation("trajectory grid must start at t0 >= 1")
    t = traj.t
    return GridFunction(t, traj.x_prime.values - traj.x.values / t)


def initial_wronskian(traj: Trajectory) -> float:
    return float(traj.x_prime.values[0] - traj.x.values[0] / traj.t0)


def wronskian_voc(coeff: Coefficient, w: Nonlinearity, traj: Trajectory, t: float, tol: float = 1e-12) -> float:
    """W at ``t`` from the variation-of-constants formula.

    ``(1/t) [t0 W0 - int_{t0}^t s a(s) w(x(s)) ds]`` with W0 read from the
    trajectory and x interpolated between its nodes.
    """
    t0 = traj.t0
    if t < t0 or t > traj.x.end:
        raise InvalidArgument(f"t={t} outside trajectory range [{t0}, {traj.x.end}]")
    W0 = initial_wronskian(traj)
    if t == t0:
        return W0
    grid = traj.t
    pts = np.union1d(grid[(grid > t0) & (grid < t)], coeff.points(t0, t))

    def integrand(s):
        return s * coeff.func(s) * w.func(np.interp(s, grid, traj.x.values))

    res = finite_integral(integrand, t0, t, tol, points=pts)
    return (t0 * W0 - res.value) / t


def infer_concavity(coeff: Coefficient, w: Nonlinearity, traj: Trajectory, band: float = 0.0) -> Concavity | None:
    """Sign of x'' = -a(t) w(x(t)) on the grid, or None when it changes."""
    xpp = -coeff.func(traj.t) * w.func(traj.x.values)
    if np.all(xpp <= band):
        return "nonpositive"
    if np.all(xpp >= -band):
        return "nonnegative"
    return None


# --------------------------------------------------------------------------- #
# Sign structure under one-signed concavity
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class ZeroStructure:
    """Outcome of :func:`zero_structure`.

    ``interval`` is the zero set as ``(lo, hi)`` (``lo == hi`` when
    degenerate) or None when W has no zero; ``violation`` holds the
    offending triple of times when the sign pattern is impossible.
    """

    ok: bool
    interval: tuple[float, float] | None
    violation: tuple[float, float, float] | None = None


def _band_signs(values: np.ndarray, band: float) -> np.ndarray:
    s = np.sign(values).astype(int)
    s[np.abs(values) <= band] = 0
    return s


def zero_structure(W: GridFunction, concavity_sign: Concavity, band: float = 1e-12) -> ZeroStructure:
    """Check W against the one-crossing sign law for concave (or convex) x.

    With x'' <= 0 the product t W(t) is nonincreasing, so W can pass from
    nonnegative to negative values at most once and its zero set is an
    interval. The mirrored law applies for x'' >= 0. Values within ``band``
    of zero count as zeros.
    """
    if concavity_sign not in ("nonpositive", "nonnegative"):
        raise InvalidArgument(f"unknown concavity sign {concavity_sign!r}")
    t = W.abscissae
    s = _band_signs(W.values, band)
    ordered = s if concavity_sign == "nonpositive" else -s
    rises = np.flatnonzero(np.diff(ordered) > 0)
    if rises.size:
        j = int(rises[0]) + 1
        earlier = np.flatnonzero(ordered[: j - 1] >= ordered[j])
        a = int(earlier[-1]) if earlier.size else j - 1
        return ZeroStructure(False, None, (float(t[a]), float(t[j - 1]), float(t[j])))
    zeros = np.flatnonzero(s == 0)
    if zeros.size:
        return ZeroStructure(True, (float(t[zeros[0]]), float(t[zeros[-1]])))
    change = np.flatnonzero(s[:-1] != s[1:])
    if change.size:
        i = int(change[0])
        v0, v1 = W.values[i], W.values[i + 1]
        root = float(t[i] + (t[i + 1] - t[i]) * v0 / (v0 - v1))
        return ZeroStructure(True, (root, root))
    return ZeroStructure(True, None)


@dataclass(frozen=True)
class ZeroEquationResult:
    """Solution of ``t0 W0 = int_{t0}^T s a(s) w(x(s)) ds``.

    ``T`` is None when the cumulative integral never reaches ``t0 W0`` on the
    horizon; then ``necessary_condition`` records that the integral stays
    below ``t0 W0`` there, as required for W to remain positive.
    """

    T: float | None
    target: float
    W0: float
    cumulative_at_horizon: float
    necessary_condition: bool


def zero_equation_T(coeff: Coefficient, w: Nonlinearity, traj: Trajectory, tol: float = 1e-12) -> ZeroEquationResult:
    """Locate the zero T of W by inverting the monotone cumulative integral."""
    t = traj.t
    t0 = traj.t0
    W0 = initial_wronskian(traj)
    target = t0 * W0
    if W0 < 0:
        raise PreconditionViolation("W0 must be nonnegative for a crossing to exist")
    if W0 == 0.0:
        return ZeroEquationResult(t0, 0.0, 0.0, 0.0, False)

    def integrand(s):
        return s * coeff.func(s) * w.func(np.interp(s, t, traj.x.values))

    panels = gauss_legendre_on_panels(integrand, t[:-1], t[1:])
    if np.any(panels < -tol):
        raise PreconditionViolation("cumulative integral decreases: a(t) w(x(t)) takes negative values")
    cum = np.concatenate([[0.0], np.cumsum(panels)])
    if cum[-1] < target:
        return ZeroEquationResult(None, target, W0, float(cum[-1]), True)
    i = int(np.searchsorted(cum, target)) - 1
    i = max(i, 0)
    lo, hi = t[i], t[i + 1]

    def residual(T):
        if T == lo:
            return cum[i] - target
        return cum[i] + finite_integral(integrand, lo, T, tol).value - target

    T = brentq(residual, lo, hi, xtol=1e-14 * hi, rtol=1e-12)
    return ZeroEquationResult(float(T), target, W0, float(cum[-1]), False)


# --------------------------------------------------------------------------- #
# Oscillation scan
# --------------------------------------------------------------------------- #


def _zeros_of_interpolant(t: np.ndarray, v: np.ndarray, band: float) -> np.ndarray:
    s = _band_signs(v, band)
    nz = np.flatnonzero(s != 0)
    if nz.size < 2:
        return np.empty(0)
    flips = np.flatnonzero(s[nz[:-1]] != s[nz[1:]])
    zeros = []
    for f in flips:
        i, j = nz[f], nz[f + 1]
        if j == i + 1:
            # the interpolant is linear on [t_i, t_j]; its root is exact
            zeros.append(t[i] + (t[j] - t[i]) * v[i] / (v[i] - v[j]))
        else:
            zeros.append(0.5 * (t[i + 1] + t[j - 1]))
    return np.asarray(zeros, dtype=float)


def oscillation_scan(W: GridFunction, min_alternations: int = 1, band: float = 0.0) -> OscillationReport:
    """Sign changes of W with one strict-sign witness per window between zeros.

    Witnesses are the nodes of largest |W| in each window bounded by two
    zeros. The alternation pattern is aligned to start at a zero followed by
    a positive window. ``count`` is the number of sign changes found on the
    finite grid; it certifies nothing beyond the horizon.
    """
    t, v = W.abscissae, W.values
    zeros = _zeros_of_interpolant(t, v, band)
    pos_t, pos_v, neg_t, neg_v = [], [], [], []
    ok = True
    start = 0
    # align with the zero -> positive -> zero -> negative -> zero pattern
    if zeros.size >= 2:
        first_mid = (t > zeros[0]) & (t < zeros[1])
        if first_mid.any() and v[first_mid][np.argmax(np.abs(v[first_mid]))] < 0:
            start = 1
    for n in range(start, zeros.size - 1):
        inside = (t > zeros[n]) & (t < zeros[n + 1])
        if not inside.any():
            ok = False
            continue
        idx = np.flatnonzero(inside)
        best = idx[np.argmax(np.abs(v[idx]))]
        expect_positive = (n - start) % 2 == 0
        if expect_positive:
            pos_t.append(t[best])
            pos_v.append(v[best])
            ok &= bool(v[best] > band)
        else:
            neg_t.append(t[best])
            neg_v.append(v[best])
            ok &= bool(v[best] < -band)
    count = int(zeros.size)
    return OscillationReport(
        zeros=zeros,
        positive_witnesses=np.asarray(pos_t, dtype=float),
        negative_witnesses=np.asarray(neg_t, dtype=float),
        positive_values=np.asarray(pos_v, dtype=float),
        negative_values=np.asarray(neg_v, dtype=float),
        interleaving_ok=bool(ok and count >= max(min_alternations, 1)),
        count=count,
        horizon=W.end,
    )
