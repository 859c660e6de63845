"""Domain types: coefficients a(t), nonlinearities w(x), grid-sampled functions.

Also hosts the sampling-based hypothesis checks for w and the analysis grid
construction used by every solver.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .errors import InvalidArgument, OutOfRange

ArrayFunc = Callable[[np.ndarray], np.ndarray]


def _as_vectorized(func: Callable) -> ArrayFunc:
    """Return a callable that maps arrays to float arrays of the same shape."""

    def wrapped(x):
        arr = np.asarray(x, dtype=float)
        out = np.asarray(func(arr), dtype=float)
        if out.shape != arr.shape:
            out = np.vectorize(lambda v: float(func(v)), otypes=[float])(arr)
        return out

    return wrapped


# --------------------------------------------------------------------------- #
# Grid functions
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class GridFunction:
    """A real function sampled on a strictly increasing abscissa grid.

    Between nodes the function is the piecewise-linear interpolant; at the
    nodes it returns the stored values bit-exactly.
    """

    abscissae: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.array(self.abscissae, dtype=float)
        v = np.array(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape:
            raise InvalidArgument("abscissae and values must be 1-d arrays of equal length")
        if t.size < 1:
            raise InvalidArgument("a grid function needs at least one node")
        if np.any(np.diff(t) <= 0):
            raise InvalidArgument("abscissae must be strictly increasing")
        t.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "abscissae", t)
        object.__setattr__(self, "values", v)

    @property
    def start(self) -> float:
        return float(self.abscissae[0])

    @property
    def end(self) -> float:
        return float(self.abscissae[-1])

    def __len__(self) -> int:
        return self.abscissae.size

    def __call__(self, t):
        return grid_eval(self, t)

    def with_values(self, values) -> GridFunction:
        return GridFunction(self.abscissae, values)

    def scaled(self, factor: float) -> GridFunction:
        return GridFunction(self.abscissae, factor * self.values)


def grid_eval(f: GridFunction, t):
    """Evaluate the piecewise-linear interpolant of ``f`` at ``t``.

    Raises :class:`OutOfRange` if any requested time lies outside
    ``[f.start, f.end]``.
    """
    tt = np.asarray(t, dtype=float)
    if np.any(tt < f.abscissae[0]) or np.any(tt > f.abscissae[-1]) or np.any(np.isnan(tt)):
        raise OutOfRange(f"t outside grid range [{f.start}, {f.end}]")
    out = np.interp(tt, f.abscissae, f.values)
    return float(out) if out.ndim == 0 else out


def make_grid(
    t0: float,
    t_max: float,
    density: float = 2000.0,
    breakpoints: Sequence[float] | np.ndarray = (),
) -> np.ndarray:
    """Log-uniform grid on ``[t0, t_max]`` with ``density`` nodes per unit of ln t.

    Every breakpoint strictly inside the range is inserted as a node.
    """
    if not (t0 > 0 and t_max > t0):
        raise InvalidArgument(f"need 0 < t0 < t_max, got t0={t0}, t_max={t_max}")
    if density <= 0:
        raise InvalidArgument("grid density must be positive")
    n = max(2, int(math.ceil(density * math.log(t_max / t0))) + 1)
    grid = np.exp(np.linspace(math.log(t0), math.log(t_max), n))
    grid[0], grid[-1] = t0, t_max
    bp = np.unique(np.asarray(breakpoints, dtype=float))
    bp = bp[(bp > t0 * (1 + 1e-9)) & (bp < t_max * (1 - 1e-9))]
    if bp.size:
        # base nodes too close to a breakpoint would leave sliver panels
        idx = np.searchsorted(bp, grid)
        left = bp[np.clip(idx - 1, 0, bp.size - 1)]
        right = bp[np.clip(idx, 0, bp.size - 1)]
        near = np.minimum(np.abs(grid - left), np.abs(grid - right)) < 1e-9 * grid
        near[0] = near[-1] = False
        grid = np.union1d(grid[~near], bp)
    return grid


# --------------------------------------------------------------------------- #
# Nonlinearities
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class Nonlinearity:
    """The nonlinearity w(x) together with its declared hypotheses.

    ``lipschitz_k`` is the constant k of the global Lipschitz bound
    ``|w(x) - w(y)| <= k |x - y|``. The flags are declarations; use
    :func:`check_lipschitz` and :func:`check_submultiplicative` to test them.
    """

    func: Callable
    lipschitz_k: float = 1.0
    is_lipschitz: bool = True
    is_positive_submultiplicative: bool = False
    is_nondecreasing: bool = False
    is_identity: bool = False
    name: str = "custom"

    def __post_init__(self):
        if not self.lipschitz_k > 0:
            raise InvalidArgument("lipschitz_k must be positive")
        object.__setattr__(self, "func", _as_vectorized(self.func))

    def __call__(self, x):
        out = self.func(np.asarray(x, dtype=float))
        return float(out) if np.ndim(out) == 0 else out


def identity() -> Nonlinearity:
    return Nonlinearity(
        func=lambda x: x,
        lipschitz_k=1.0,
        is_lipschitz=True,
        is_positive_submultiplicative=True,
        is_nondecreasing=True,
        is_identity=True,
        name="identity",
    )


def power(lam: float, lipschitz_k: float | None = None) -> Nonlinearity:
    """Emden-Fowler nonlinearity ``w(x) = sign(x) |x|**lam``.

    Only ``lam == 1`` is globally Lipschitz; for other exponents pass the
    constant valid on the range of interest through ``lipschitz_k``.
    """
    if lam <= 0:
        raise InvalidArgument("power exponent must be positive")
    return Nonlinearity(
        func=lambda x: np.sign(x) * np.abs(x) ** lam,
        lipschitz_k=1.0 if lipschitz_k is None else lipschitz_k,
        is_lipschitz=(lam == 1.0) or lipschitz_k is not None,
        is_positive_submultiplicative=True,
        is_nondecreasing=True,
        is_identity=(lam == 1.0),
        name=f"power:{lam:g}",
    )


def tabulated_nonlinearity(x: Sequence[float], w: Sequence[float], name: str = "custom-table") -> Nonlinearity:
    """Piecewise-linear nonlinearity through the given samples (constant beyond the ends)."""
    xs = np.asarray(x, dtype=float)
    ws = np.asarray(w, dtype=float)
    if xs.size < 2 or xs.shape != ws.shape or np.any(np.diff(xs) <= 0):
        raise InvalidArgument("need at least two samples with strictly increasing x")
    slopes = np.abs(np.diff(ws) / np.diff(xs))
    return Nonlinearity(
        func=lambda v: np.interp(v, xs, ws),
        lipschitz_k=float(max(slopes.max(), 1e-300)),
        is_lipschitz=True,
        is_nondecreasing=bool(np.all(np.diff(ws) >= 0)),
        name=name,
    )


# --------------------------------------------------------------------------- #
# Coefficients
# --------------------------------------------------------------------------- #


def _no_breakpoints(lo: float, hi: float) -> np.ndarray:
    return np.empty(0)


@dataclass(frozen=True)
class Coefficient:
    """The coefficient a(t) of ``x'' + a(t) w(x) = 0`` on ``[domain_start, inf)``.

    Attributes:
        func: vectorized a(t).
        tail_bound: nonincreasing envelope B(t) >= int_t^inf s^2 |a(s)| ds with
            B(t) -> 0; certifies truncation of every semi-infinite integral.
        signed_tail: optional closed form of int_t^inf s^2 a(s) ds.
        abs_tail: optional closed form of int_t^inf s^2 |a(s)| ds.
        breakpoints: callable ``(lo, hi) -> array`` listing the points in
            ``(lo, hi)`` where a or |a| is not smooth. A finite sequence is
            accepted and wrapped.
        log_envelope: optional increasing g(t) such that ``scaled(g(t))`` can
            be evaluated without underflow for s >= t.
        checkpoints: optional ``k -> (t_negative, t_positive)`` structural
            witness times (cell-structured coefficients).
        rescaler: optional ``L -> Coefficient`` giving a(s) * exp(L) in a
            numerically stable form.
    """

    func: Callable
    tail_bound: Callable
    domain_start: float = 1.0
    signed_tail: Callable | None = None
    abs_tail: Callable | None = None
    breakpoints: Callable | Sequence[float] = _no_breakpoints
    name: str = "custom"
    log_envelope: Callable | None = None
    checkpoints: Callable | None = None
    rescaler: Callable | None = field(default=None, repr=False)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.domain_start >= 1.0:
            raise InvalidArgument("coefficient domain must start at t0 >= 1")
        object.__setattr__(self, "func", _as_vectorized(self.func))
        object.__setattr__(self, "tail_bound", _as_vectorized(self.tail_bound))
        for name in ("signed_tail", "abs_tail"):
            f = getattr(self, name)
            if f is not None:
                object.__setattr__(self, name, _as_vectorized(f))
        if not callable(self.breakpoints):
            pts = np.sort(np.asarray(self.breakpoints, dtype=float))

            def listed(lo, hi, _pts=pts):
                return _pts[(_pts > lo) & (_pts < hi)]

            object.__setattr__(self, "breakpoints", listed)

    def __call__(self, t):
        out = self.func(np.asarray(t, dtype=float))
        return float(out) if np.ndim(out) == 0 else out

    def points(self, lo: float, hi: float) -> np.ndarray:
        return np.asarray(self.breakpoints(lo, hi), dtype=float)

    def scaled(self, log_factor: float) -> Coefficient:
        """Coefficient a(s) * exp(log_factor), with tails and bound scaled alike."""
        if log_factor == 0.0:
            return self
        if self.rescaler is not None:
            return self.rescaler(log_factor)
        m = math.exp(log_factor)
        return Coefficient(
            func=lambda s: m * self.func(s),
            tail_bound=lambda s: m * self.tail_bound(s),
            domain_start=self.domain_start,
            signed_tail=None if self.signed_tail is None else (lambda s: m * self.signed_tail(s)),
            abs_tail=None if self.abs_tail is None else (lambda s: m * self.abs_tail(s)),
            breakpoints=self.breakpoints,
            name=self.name,
            checkpoints=self.checkpoints,
            params=self.params,
        )

    def log_scale_at(self, t: float) -> float:
        """Log factor that brings tails at ``t`` to order one (0 without an envelope)."""
        return 0.0 if self.log_envelope is None else float(self.log_envelope(t))


def zero_coefficient(t0: float = 1.0) -> Coefficient:
    return Coefficient(
        func=lambda t: np.zeros_like(t),
        tail_bound=lambda t: np.zeros_like(t),
        domain_start=t0,
        signed_tail=lambda t: np.zeros_like(t),
        abs_tail=lambda t: np.zeros_like(t),
        name="zero",
    )


# --------------------------------------------------------------------------- #
# Hypothesis checks (sampling certificates, not proofs)
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class LipschitzReport:
    passed: bool
    k: float
    max_ratio: float
    worst_pair: tuple[float, float]
    domain: tuple[float, float]
    n_pairs: int
    # max |w(x)|/|x|, meaningful when w(0) = 0
    max_growth: float


@dataclass(frozen=True)
class SubmultiplicativeReport:
    passed: bool
    worst_margin: float
    worst_pair: tuple[float, float]
    zero_at_origin: bool
    positive_on_positives: bool
    domain: tuple[float, float]
    n_pairs: int


def _sample_pairs(lo: float, hi: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic low-discrepancy pairs plus endpoint and near-diagonal pairs."""
    pts = qmc.Halton(d=2, scramble=False).random(n + 1)[1:]
    x = lo + (hi - lo) * pts[:, 0]
    y = lo + (hi - lo) * pts[:, 1]
    # near-diagonal partners resolve the local slope, endpoints catch boundary maxima
    h = 1e-6 * (hi - lo)
    singles = np.concatenate([[lo, hi], lo + (hi - lo) * qmc.Halton(d=1, scramble=False).random(n + 1)[1:, 0]])
    near_x = np.clip(singles, lo, hi - h)
    near_y = near_x + h
    ends_x = np.array([lo, lo, hi])
    ends_y = np.array([hi, 0.5 * (lo + hi), 0.5 * (lo + hi)])
    return np.concatenate([x, near_x, ends_x]), np.concatenate([y, near_y, ends_y])


def check_lipschitz(
    w: Nonlinearity,
    domain: tuple[float, float] = (-10.0, 10.0),
    n_samples: int = 2048,
) -> LipschitzReport:
    """Largest observed ``|w(x)-w(y)|/|x-y|`` over sampled pairs, compared with ``w.lipschitz_k``."""
    lo, hi = map(float, domain)
    if not hi > lo:
        raise InvalidArgument(f"empty domain [{lo}, {hi}]")
    if n_samples < 2:
        raise InvalidArgument("n_samples must be at least 2")
    x, y = _sample_pairs(lo, hi, n_samples)
    keep = x != y
    x, y = x[keep], y[keep]
    ratios = np.abs(w.func(x) - w.func(y)) / np.abs(x - y)
    i = int(np.argmax(ratios))
    max_ratio = float(ratios[i])
    singles = np.concatenate([x, y])
    nz = singles != 0
    growth = np.abs(w.func(singles[nz])) / np.abs(singles[nz])
    return LipschitzReport(
        passed=bool(max_ratio <= w.lipschitz_k * (1 + 1e-12)),
        k=w.lipschitz_k,
        max_ratio=max_ratio,
        worst_pair=(float(x[i]), float(y[i])),
        domain=(lo, hi),
        n_pairs=int(x.size),
        max_growth=float(growth.max()) if growth.size else 0.0,
    )


def check_submultiplicative(
    w: Nonlinearity,
    n_samples: int = 2048,
    domain: tuple[float, float] = (-10.0, 10.0),
) -> SubmultiplicativeReport:
    """Worst margin ``w(|x|) w(|y|) - |w(xy)|`` plus the ``w(0) = 0`` and positivity checks."""
    if n_samples < 2:
        raise InvalidArgument("n_samples must be at least 2")
    lo, hi = map(float, domain)
    if not hi > lo:
        raise InvalidArgument(f"empty domain [{lo}, {hi}]")
    x, y = _sample_pairs(lo, hi, n_samples)
    lhs = w.func(np.abs(x)) * w.func(np.abs(y))
    rhs = np.abs(w.func(x * y))
    margin = lhs - rhs
    i = int(np.argmin(margin))
    worst = float(margin[i])
    scale = max(float(np.max(np.abs(lhs))), 1.0)
    w0 = float(w.func(np.array([0.0]))[0])
    pos = np.abs(np.concatenate([x, y]))
    pos = pos[pos > 0]
    positive = bool(np.all(w.func(pos) > 0))
    zero_ok = w0 == 0.0
    return SubmultiplicativeReport(
        passed=bool(worst >= -1e-12 * scale and zero_ok and positive),
        worst_margin=worst,
        worst_pair=(float(x[i]), float(y[i])),
        zero_at_origin=zero_ok,
        positive_on_positives=positive,
        domain=(lo, hi),
        n_pairs=int(x.size),
    )
