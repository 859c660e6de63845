"""Solutions with prescribed asymptote c t + o(1) and oscillatory pseudo-wronskian.

The unknown is y = W(x, .), living in the ball ``t |y(t)| <= eta`` with the
weighted sup metric ``delta(y1, y2) = sup t |y1 - y2|``. The operator

    V(y)(t) = (1/t) int_t^inf s a(s) w(s [c - int_s^inf y(tau)/tau dtau]) ds

maps the ball into itself and contracts with factor ``eta / (|c| + eta)``
once ``int_{t0}^inf s^2 |a| <= eta / (k (|c| + eta))``. Its fixed point y0
yields ``x0(t) = t [c - int_t^inf y0(s)/s ds]`` with ``W(x0, .) = y0``.

Sign witnesses come from the indicator ratio

    R(t) = t int_t^inf s w(cs) a(s) ds / int_t^inf s^2 |a(s)| ds,

since ``R(t) < -k eta`` forces ``y0(t) < 0`` and ``R(t) > k eta`` forces
``y0(t) > 0``.
"""

from __future__ import annotations

import dataclasses
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .core import Coefficient, GridFunction, Nonlinearity, make_grid
from .errors import (
    ContractionViolation,
    DomainViolation,
    Infeasible,
    InvalidArgument,
    NoConvergence,
    PreconditionViolation,
)
from .quadrature import (
    QuadResult,
    reverse_cumulative,
    tail_integral_abs,
    truncation_horizon,
    weighted_tail_integral,
)
from .solution import SolutionCandidate, SolverDiagnostics
from .wronskian import OscillationReport, Trajectory, oscillation_scan

DEFAULT_DENSITY = 10_000.0


# --------------------------------------------------------------------------- #
# Problem definition and gate
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class OscProblem:
    coeff: Coefficient
    w: Nonlinearity
    c: float
    eta: float
    t_start: float
    tol: float = 1e-12
    gate: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.c == 0:
            raise InvalidArgument("asymptote slope c must be nonzero")
        if not self.eta > 0:
            raise InvalidArgument("eta must be positive")
        if self.t_start < self.coeff.domain_start:
            raise InvalidArgument("t_start precedes the coefficient domain")
        if not self.tol > 0:
            raise InvalidArgument("tol must be positive")

    @property
    def k(self) -> float:
        return self.w.lipschitz_k

    @property
    def q(self) -> float:
        """Contraction factor ``eta / (|c| + eta)``."""
        return self.eta / (abs(self.c) + self.eta)

    @property
    def gate_threshold(self) -> float:
        return self.eta / (self.k * (abs(self.c) + self.eta))


def check_gate(prob: OscProblem, tol: float = 1e-12) -> dict:
    """Smallness gate ``int_{t_start}^inf s^2 |a| <= eta / (k (|c| + eta))``.

    The tail is bounded above by the quadrature value plus its full error
    budget, so a pass is certified.
    """
    if not prob.w.is_lipschitz:
        raise PreconditionViolation(f"nonlinearity {prob.w.name} is not declared Lipschitz")
    if float(prob.w.func(np.array([0.0]))[0]) != 0.0:
        raise PreconditionViolation("w(0) must vanish")
    A = tail_integral_abs(prob.coeff, prob.t_start, tol)
    upper = A.value + A.budget
    return {
        "tail": A.value,
        "tail_upper": upper,
        "threshold": prob.gate_threshold,
        "passed": bool(upper <= prob.gate_threshold),
        "q": prob.q,
        "t_start": prob.t_start,
        "eta": prob.eta,
        "k": prob.k,
    }


# --------------------------------------------------------------------------- #
# Indicators
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class LIndicatorEstimate:
    """Indicator ratios at checkpoints with running extrema.

    Finite checkpoints only give observed values; ``running_sup[-1]`` and
    ``running_inf[-1]`` are what the data show, not limits.
    """

    checkpoints: np.ndarray
    ratios: np.ndarray
    ratio_errors: np.ndarray
    skipped: np.ndarray
    running_sup: np.ndarray
    running_inf: np.ndarray
    verdict: str
    margin: float

    @property
    def L_plus_observed(self) -> float:
        return float(self.running_sup[-1]) if self.running_sup.size else math.nan

    @property
    def L_minus_observed(self) -> float:
        return float(self.running_inf[-1]) if self.running_inf.size else math.nan

    def to_dict(self) -> dict:
        return {
            "checkpoints": self.checkpoints.tolist(),
            "ratios": [None if math.isnan(r) else r for r in self.ratios.tolist()],
            "ratio_errors": [None if math.isnan(r) else r for r in self.ratio_errors.tolist()],
            "skipped": self.skipped.tolist(),
            "running_sup": self.running_sup.tolist(),
            "running_inf": self.running_inf.tolist(),
            "verdict": self.verdict,
            "margin": self.margin,
            "L_plus_observed": self.L_plus_observed,
            "L_minus_observed": self.L_minus_observed,
        }


@dataclass(frozen=True)
class _Tails:
    """Numerator and denominator of R at one time, in units of exp(-log_scale)."""

    t: float
    weighted: float
    weighted_err: float
    absolute: float
    absolute_err: float
    log_scale: float

    @property
    def ratio(self) -> float:
        return self.t * self.weighted / self.absolute

    @property
    def ratio_error(self) -> float:
        r = abs(self.ratio)
        return r * (self.weighted_err / max(abs(self.weighted), 1e-300) + self.absolute_err / self.absolute)


def _tails_at(coeff: Coefficient, w: Nonlinearity, c: float, t: float, rel_tol: float,
              use_closed_form: bool = False) -> _Tails:
    L = coeff.log_scale_at(t)
    sc = coeff.scaled(L)
    if use_closed_form and w.is_identity and sc.signed_tail is not None and sc.abs_tail is not None:
        return _Tails(t, c * float(sc.signed_tail(t)), 0.0, float(sc.abs_tail(t)), 0.0, L)
    kappa = w.lipschitz_k * abs(c)
    scale = max(float(sc.tail_bound(t)), 1e-300)
    tol = rel_tol * scale
    num = weighted_tail_integral(sc, lambda s: w.func(c * s), t, tol * max(kappa, 1.0), kappa=kappa)
    den = tail_integral_abs(sc, t, tol)
    return _Tails(t, num.value, num.budget, den.value, den.budget, L)


def estimate_L_indicators(
    coeff: Coefficient,
    w: Nonlinearity,
    c: float,
    checkpoints: Sequence[float],
    tol: float = 1e-10,
    margin_frac: float = 0.1,
    denominator_floor: float = 1e-300,
    use_closed_form: bool = False,
) -> LIndicatorEstimate:
    """Indicator ratios R(t) at increasing checkpoints and the both-sides verdict.

    ``tol`` is relative to the tail-bound envelope at each checkpoint (each
    tail is rescaled by the coefficient's log envelope first, so the
    quadrature tolerance stays absolute in scaled units). Checkpoints whose
    denominator is not certifiably positive are skipped and flagged.
    """
    cps = np.asarray(checkpoints, dtype=float)
    if cps.size == 0 or np.any(np.diff(cps) <= 0):
        raise InvalidArgument("checkpoints must be a nonempty increasing sequence")
    ratios = np.full(cps.size, np.nan)
    errs = np.full(cps.size, np.nan)
    skipped = np.zeros(cps.size, dtype=bool)
    for i, t in enumerate(cps):
        tails = _tails_at(coeff, w, c, float(t), tol, use_closed_form)
        if tails.absolute <= max(denominator_floor, 2.0 * tails.absolute_err):
            skipped[i] = True
            continue
        ratios[i] = tails.ratio
        errs[i] = tails.ratio_error
    filled_sup = np.where(skipped, -np.inf, ratios)
    filled_inf = np.where(skipped, np.inf, ratios)
    running_sup = np.maximum.accumulate(filled_sup)
    running_inf = np.minimum.accumulate(filled_inf)
    if skipped.all():
        return LIndicatorEstimate(cps, ratios, errs, skipped, running_sup, running_inf, "inconclusive", math.nan)
    sup, inf = float(running_sup[-1]), float(running_inf[-1])
    margin = margin_frac * max(abs(sup), abs(inf))
    if sup > margin and inf < -margin:
        verdict = "both-sides"
    elif sup <= 0 or inf >= 0:
        verdict = "one-sided"
    else:
        verdict = "inconclusive"
    return LIndicatorEstimate(cps, ratios, errs, skipped, running_sup, running_inf, verdict, margin)


def structural_checkpoints(coeff: Coefficient, k_max: int, k_min: int = 1) -> np.ndarray:
    """Interleaved cell checkpoints (negative side first) for cell-structured coefficients."""
    if coeff.checkpoints is None:
        raise InvalidArgument(f"{coeff.name} exposes no structural checkpoints")
    pts = []
    for k in range(k_min, k_max + 1):
        pts.extend(coeff.checkpoints(k))
    return np.asarray(pts, dtype=float)


# --------------------------------------------------------------------------- #
# Feasibility
# --------------------------------------------------------------------------- #


def feasibility_search(
    coeff: Coefficient,
    w: Nonlinearity,
    c: float,
    eta_grid: Sequence[float],
    indicators: LIndicatorEstimate,
    t_grid: Sequence[float] | None = None,
    tol: float = 1e-12,
    solve_tol: float = 1e-12,
) -> OscProblem:
    """Pick eta from ``eta_grid`` and a start time that satisfy both gates.

    The indicator margins must exceed ``k * eta`` (the conservative reading;
    the plain ``eta`` reading is recorded alongside). Then the start time is
    advanced along ``t_grid`` until the smallness gate holds.
    """
    if indicators.verdict != "both-sides":
        raise PreconditionViolation(f"indicator verdict is {indicators.verdict!r}, need 'both-sides'")
    k = w.lipschitz_k
    sup, inf = indicators.L_plus_observed, indicators.L_minus_observed
    etas = sorted((float(e) for e in eta_grid), reverse=True)
    chosen = next((e for e in etas if sup > k * e and inf < -k * e), None)
    diagnostics = {"L_plus_observed": sup, "L_minus_observed": inf, "eta_grid": etas, "k": k}
    if chosen is None:
        raise Infeasible("no eta in the grid is below the observed indicator margins / k", diagnostics)
    if t_grid is None:
        t0 = coeff.domain_start
        t_grid = np.unique(np.concatenate([[t0], t0 * np.geomspace(1.0, 1e4, 161)]))
    threshold = chosen / (k * (abs(c) + chosen))
    tried = []
    for ts in t_grid:
        A = tail_integral_abs(coeff, float(ts), tol)
        upper = A.value + A.budget
        tried.append((float(ts), upper))
        if upper <= threshold:
            gate = {
                "tail": A.value,
                "tail_upper": upper,
                "threshold": threshold,
                "passed": True,
                "q": chosen / (abs(c) + chosen),
                "t_start": float(ts),
                "eta": chosen,
                "k": k,
                "margin_reading_k_eta": bool(sup > k * chosen and inf < -k * chosen),
                "margin_reading_eta": bool(sup > chosen and inf < -chosen),
            }
            return OscProblem(coeff, w, c, chosen, float(ts), solve_tol, gate)
    diagnostics.update({"eta": chosen, "threshold": threshold, "tried": tried[-5:]})
    raise Infeasible("smallness gate not met anywhere on the start-time grid", diagnostics)


# --------------------------------------------------------------------------- #
# The contraction operator
# --------------------------------------------------------------------------- #


def _apply_V(t: np.ndarray, a_vals: np.ndarray, y: np.ndarray, c: float, w: Nonlinearity):
    inner = reverse_cumulative(t, y / t)
    g = t * a_vals * w.func(t * (c - inner))
    return reverse_cumulative(t, g) / t, inner


def _domain_slack(prob: OscProblem) -> float:
    return 1e-9 * prob.eta


def apply_V_contraction(y: GridFunction, prob: OscProblem) -> GridFunction:
    """One application of V on the grid of ``y``.

    Both tails are reverse cumulative trapezoid passes ending at the last
    node; what lies beyond it is accounted for in the solver's error budget.
    """
    t = y.abscissae
    if t[0] < prob.coeff.domain_start:
        raise InvalidArgument("grid starts before the coefficient domain")
    if np.any(t * np.abs(y.values) > prob.eta + _domain_slack(prob)):
        raise DomainViolation("y is outside the ball t |y(t)| <= eta")
    v, _ = _apply_V(t, prob.coeff.func(t), y.values, prob.c, prob.w)
    return GridFunction(t, v)


def solver_grid(prob: OscProblem, horizon: float | None = None, density: float = DEFAULT_DENSITY) -> np.ndarray:
    """Log-uniform grid from ``t_start`` to a horizon where the outer tail is below ``tol``."""
    bound_factor = prob.k * (abs(prob.c) + prob.eta)
    T = truncation_horizon(lambda s: bound_factor * prob.coeff.tail_bound(s), prob.t_start, prob.tol)
    T = max(T, prob.t_start * 1.5)
    if horizon is not None:
        T = max(T, float(horizon))
    return make_grid(prob.t_start, T, density, prob.coeff.points(prob.t_start, T))


def _coarse_indices(n: int) -> np.ndarray:
    idx = np.arange(0, n, 2)
    if idx[-1] != n - 1:
        idx = np.append(idx, n - 1)
    return idx


def picard_solve(
    prob: OscProblem,
    max_iter: int = 200,
    horizon: float | None = None,
    density: float = DEFAULT_DENSITY,
    grid: np.ndarray | None = None,
    ratio_slack: float = 0.05,
    check_gate_first: bool = True,
) -> SolutionCandidate:
    """Picard iteration ``y_{n+1} = V(y_n)`` from ``y_0 = 0`` in the weighted sup metric.

    Stops when ``delta(y_{n+1}, y_n) <= prob.tol``. Reports the empirical
    contraction ratios, the a-posteriori bound ``q/(1-q) delta_last`` and a
    per-node error budget for ``t y``: outer and inner truncation, a
    Richardson estimate of the trapezoid error, and the iteration error,
    each propagated through the contraction.
    """
    if check_gate_first:
        gate = prob.gate if prob.gate.get("passed") else check_gate(prob)
        if not gate["passed"]:
            raise PreconditionViolation(
                f"smallness gate fails: tail {gate['tail_upper']:.3g} > threshold {gate['threshold']:.3g}"
            )
    else:
        gate = dict(prob.gate)
    t = solver_grid(prob, horizon, density) if grid is None else np.asarray(grid, dtype=float)
    a_vals = prob.coeff.func(t)
    c, w, k, eta, q = prob.c, prob.w, prob.k, prob.eta, prob.q

    y = np.zeros_like(t)
    deltas: list[float] = []
    ratios: list[float] = []
    scale_ref = None
    converged = False
    for it in range(1, max_iter + 1):
        y_new, _ = _apply_V(t, a_vals, y, c, w)
        if np.any(t * np.abs(y_new) > eta + _domain_slack(prob)):
            raise DomainViolation(f"iterate {it} left the ball t |y| <= eta")
        delta = float(np.max(t * np.abs(y_new - y)))
        if scale_ref is None:
            scale_ref = max(float(np.max(t * np.abs(y_new))), 1e-300)
        if deltas and deltas[-1] > 1e4 * np.finfo(float).eps * scale_ref:
            ratio = delta / deltas[-1]
            ratios.append(ratio)
            if ratio > 1.0:
                raise ContractionViolation(f"measured contraction ratio {ratio:.3g} > 1 at iteration {it}")
        deltas.append(delta)
        y_prev, y = y, y_new
        if delta <= prob.tol:
            converged = True
            break
    if not converged:
        raise NoConvergence(f"no convergence in {max_iter} iterations (delta={deltas[-1]:.3g})",
                            last=GridFunction(t, y), previous=GridFunction(t, y_prev))

    # reconstruction x0 = t (c - int_t^T y/s ds), x0' = c - int_t^T y/s ds + y
    v_fine, inner = _apply_V(t, a_vals, y, c, w)
    x = t * (c - inner)
    xp = c - inner + y

    # error budget for t*y
    B_T = float(prob.coeff.tail_bound(t[-1]))
    T = float(t[-1])
    outer = k * (abs(c) + eta) * B_T
    inner_tail = min(eta / T, k * (abs(c) + eta) * B_T / T)
    A_t = reverse_cumulative(t, t * t * np.abs(a_vals)) + B_T
    idx = _coarse_indices(t.size)
    v_coarse, _ = _apply_V(t[idx], a_vals[idx], y[idx], c, w)
    disc_nodes = t[idx] * np.abs(v_fine[idx] - v_coarse)
    disc = np.interp(t, t[idx], disc_nodes)
    wrapup = q / (1.0 - q) * deltas[-1]
    direct = outer + k * A_t * inner_tail + disc
    # t |V(y1) - V(y2)|(t) <= k A(t)/t * delta(y1, y2)
    propagated = k * A_t / t * (float(direct.max()) + wrapup) / (1.0 - q)
    budget = direct + wrapup + propagated

    diag = SolverDiagnostics(
        iterations=len(deltas),
        converged=True,
        deltas=tuple(deltas),
        ratios=tuple(ratios),
        max_ratio=max(ratios) if ratios else 0.0,
        q=q,
        truncation_error=outer,
        wrapup_bound=wrapup,
        grid_size=int(t.size),
        horizon=T,
        extra={
            "ratio_ok": bool((max(ratios) if ratios else 0.0) <= q + ratio_slack),
            "inner_tail_bound": inner_tail,
            "max_discretization": float(disc.max()),
            "gate": gate,
        },
    )
    traj = Trajectory(GridFunction(t, x), GridFunction(t, xp), "fixed-point-reconstructed")
    yg = GridFunction(t, y)
    return SolutionCandidate(
        kind="oscillatory",
        c=c,
        fixed_point=yg,
        trajectory=traj,
        wronskian=yg,
        diagnostics=diag,
        budget=GridFunction(t, budget),
        problem=prob,
    )


def initial_slope(sol: SolutionCandidate) -> float:
    """``x0'(t0) = c - int_{t0}^inf y0/s ds + y0(t0)`` from the reconstruction."""
    return float(sol.trajectory.x_prime.values[0])


# --------------------------------------------------------------------------- #
# Asymptote
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class DefectReport:
    times: np.ndarray
    defects: np.ndarray
    t_y: np.ndarray
    bounds: np.ndarray
    within_bound: bool
    decreasing: bool
    final_defect: float

    def to_dict(self) -> dict:
        return {
            "times": self.times.tolist(),
            "defects": self.defects.tolist(),
            "t_y": self.t_y.tolist(),
            "bounds": self.bounds.tolist(),
            "within_bound": self.within_bound,
            "decreasing": self.decreasing,
            "final_defect": self.final_defect,
        }


def asymptote_defect(sol: SolutionCandidate, c: float, sample: Sequence[float]) -> DefectReport:
    """``|x0(t) - c t|`` at sample times against the bound ``k (|c| + eta) B(t)``.

    The bound follows from ``|y0(s)| <= k (|c| + eta) A(s) / s`` and
    ``t int_t^inf ds / s^2 = 1``. ``decreasing`` checks the trend of the
    defect's running envelope over the samples within the error budget.
    """
    times = np.asarray(sample, dtype=float)
    traj = sol.trajectory
    defects = np.abs(traj.x(times) - c * times)
    t_y = times * sol.fixed_point(times)
    prob = sol.problem
    budget = sol.budget(times) if sol.budget is not None else np.zeros_like(times)
    if isinstance(prob, OscProblem):
        bounds = prob.k * (abs(prob.c) + prob.eta) * prob.coeff.tail_bound(times)
    else:
        bounds = np.full_like(times, np.inf)
    # the defect oscillates with a(t); compare envelopes from each sample onwards
    envelope = np.maximum.accumulate(defects[::-1])[::-1]
    decreasing = bool(np.all(np.diff(envelope) <= times[1:] * 1e-14 + budget[1:]))
    within = bool(np.all(defects <= bounds + times * 1e-15 + budget))
    return DefectReport(times, defects, t_y, bounds, within, decreasing, float(defects[-1]))


# --------------------------------------------------------------------------- #
# Witnesses
# --------------------------------------------------------------------------- #


def _windows(mask: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs of True as (start, stop) index pairs, stop exclusive."""
    m = np.concatenate([[False], mask, [False]]).astype(int)
    d = np.diff(m)
    return list(zip(np.flatnonzero(d == 1), np.flatnonzero(d == -1)))


def witness_sequences(
    sol: SolutionCandidate,
    prob: OscProblem,
    n_wanted: int,
    t_max: float | None = None,
    rel_tol: float = 1e-10,
) -> OscillationReport:
    """Alternating times ``t_n < t^n < t_{n+1}`` where the witness inequalities hold.

    At a negative witness ``t * N(t) + k eta A(t) < 0`` and at a positive one
    ``t * N(t) - k eta A(t) > 0``, with ``N`` the weighted signed tail and
    ``A`` the absolute tail; both are re-evaluated with the certified
    quadrature and must hold beyond their error budgets. The fixed point
    must then carry the matching strict sign beyond the solver budget.

    Candidates are the cell checkpoints when the coefficient exposes them;
    otherwise, inside each grid window where the inequality holds, the node
    where ``y0`` is most extreme.
    """
    t = sol.t
    y = sol.fixed_point.values
    budget = sol.budget.values if sol.budget is not None else np.zeros_like(t)
    limit = t[-1] if t_max is None else min(float(t_max), t[-1])
    c, w, k, eta = prob.c, prob.w, prob.k, prob.eta
    coeff = prob.coeff

    candidates: list[tuple[float, int]] = []  # (time, sign)
    if coeff.checkpoints is not None:
        kk = 1
        while True:
            tn, tp = coeff.checkpoints(kk)
            if tn > limit:
                break
            if tn > t[0]:
                candidates.append((float(tn), -1))
            if t[0] < tp <= limit:
                candidates.append((float(tp), +1))
            kk += 1
    else:
        a_vals = coeff.func(t)
        num = reverse_cumulative(t, t * w.func(c * t) * a_vals)
        den = reverse_cumulative(t, t * t * np.abs(a_vals)) + float(coeff.tail_bound(t[-1]))
        lhs_neg = t * num + k * eta * den
        lhs_pos = t * num - k * eta * den
        in_range = (t > t[0]) & (t <= limit)
        for sign, mask in ((-1, (lhs_neg < 0) & in_range), (+1, (lhs_pos > 0) & in_range)):
            for i0, i1 in _windows(mask):
                seg = np.arange(i0, i1)
                best = seg[np.argmax(-sign * y[seg] * t[seg])] if sign < 0 else seg[np.argmax(y[seg] * t[seg])]
                candidates.append((float(t[best]), sign))
    candidates.sort()

    verified: list[dict] = []
    for tc, sign in candidates:
        tails = _tails_at(coeff, w, c, tc, rel_tol)
        lhs = tc * tails.weighted + sign * (-k * eta) * tails.absolute
        lhs_err = tc * tails.weighted_err + k * eta * tails.absolute_err
        ok_ineq = (lhs + lhs_err < 0) if sign < 0 else (lhs - lhs_err > 0)
        yv = float(sol.fixed_point(tc))
        bud = float(np.interp(tc, t, budget))
        ok_sign = (tc * yv < -bud) if sign < 0 else (tc * yv > bud)
        if ok_ineq and ok_sign:
            verified.append({
                "t": tc, "sign": sign, "y": yv, "budget": bud,
                "lhs": lhs * math.exp(-tails.log_scale) if tails.log_scale < 700 else 0.0,
                "lhs_scaled": lhs, "log_scale": tails.log_scale,
            })

    # alternate, starting from a negative witness
    chain: list[dict] = []
    for v in verified:
        want = -1 if not chain or chain[-1]["sign"] > 0 else +1
        if v["sign"] == want:
            chain.append(v)
        if sum(1 for x in chain if x["sign"] > 0) >= n_wanted:
            break
    if chain and chain[-1]["sign"] < 0 and sum(1 for x in chain if x["sign"] > 0) >= n_wanted:
        chain.pop()

    neg = [v for v in chain if v["sign"] < 0]
    pos = [v for v in chain if v["sign"] > 0]
    certified = np.abs(t * y) > budget
    scan_t = t[certified] if certified.sum() >= 2 else t
    scan = oscillation_scan(GridFunction(scan_t, y[certified] if certified.sum() >= 2 else y))
    zeros = scan.zeros
    if chain:
        zeros = zeros[(zeros > chain[0]["t"]) & (zeros < chain[-1]["t"])]
    # between consecutive witnesses of opposite sign there must be a zero
    interleave = all(
        np.any((zeros > a["t"]) & (zeros < b["t"])) for a, b in zip(chain[:-1], chain[1:])
    )
    n_pairs = min(len(neg), len(pos))
    return OscillationReport(
        zeros=zeros,
        positive_witnesses=np.array([v["t"] for v in pos]),
        negative_witnesses=np.array([v["t"] for v in neg]),
        positive_values=np.array([v["y"] for v in pos]),
        negative_values=np.array([v["y"] for v in neg]),
        interleaving_ok=bool(interleave and n_pairs >= n_wanted),
        count=max(len(chain) - 1, 0),
        horizon=float(limit),
        details={
            "negative_lhs": np.array([v["lhs"] for v in neg]),
            "positive_lhs": np.array([v["lhs"] for v in pos]),
            "negative_lhs_scaled": np.array([v["lhs_scaled"] for v in neg]),
            "positive_lhs_scaled": np.array([v["lhs_scaled"] for v in pos]),
            "negative_budget": np.array([v["budget"] for v in neg]),
            "positive_budget": np.array([v["budget"] for v in pos]),
            "n_wanted": n_wanted,
            "complete": bool(n_pairs >= n_wanted),
            "candidates": len(candidates),
        },
    )


# --------------------------------------------------------------------------- #
# Scaling for the linear equation
# --------------------------------------------------------------------------- #


def scale_linear(sol: SolutionCandidate, lam: float) -> SolutionCandidate:
    """The solution with slope ``lam * c`` of the linear equation: ``lam * x0``.

    Its pseudo-wronskian is ``lam * y0``; attached witnesses keep their times
    and trade sides when ``lam < 0``.
    """
    if lam == 0:
        raise InvalidArgument("lambda must be nonzero")
    prob = sol.problem
    if not isinstance(prob, OscProblem) or not prob.w.is_identity:
        raise PreconditionViolation("scaling applies only to the linear equation w(x) = x")
    new_prob = dataclasses.replace(prob, c=lam * prob.c, eta=abs(lam) * prob.eta, gate={})
    witnesses = sol.witnesses
    if witnesses is not None:
        # eta scales with |lam|, so every witness inequality scales by |lam|
        det = {
            key: abs(lam) * val if isinstance(val, np.ndarray) else val
            for key, val in witnesses.details.items()
        }
        witnesses = dataclasses.replace(
            witnesses,
            positive_values=abs(lam) * witnesses.positive_values,
            negative_values=abs(lam) * witnesses.negative_values,
            details=det,
        )
        if lam < 0:
            witnesses = witnesses.swapped()
    budget = None if sol.budget is None else sol.budget.scaled(abs(lam))
    return dataclasses.replace(
        sol,
        c=lam * sol.c,
        fixed_point=sol.fixed_point.scaled(lam),
        trajectory=sol.trajectory.scaled(lam),
        wronskian=sol.wronskian.scaled(lam),
        budget=budget,
        problem=new_prob,
        witnesses=witnesses,
    )


def solve_pipeline(
    coeff: Coefficient,
    w: Nonlinearity,
    c: float,
    eta: float,
    t_start: float | None = None,
    tol: float = 1e-12,
    n_wanted: int = 3,
    witness_t_max: float | None = None,
    horizon: float | None = None,
    density: float = DEFAULT_DENSITY,
    max_iter: int = 200,
) -> SolutionCandidate:
    """Gate, iterate, reconstruct and attach witnesses in one call."""
    prob = OscProblem(coeff, w, c, eta, coeff.domain_start if t_start is None else t_start, tol)
    gate = check_gate(prob)
    prob = dataclasses.replace(prob, gate=gate)
    sol = picard_solve(prob, max_iter=max_iter, horizon=horizon, density=density)
    report = witness_sequences(sol, prob, n_wanted, t_max=witness_t_max)
    return dataclasses.replace(sol, witnesses=report)


__all__ = [
    "OscProblem",
    "LIndicatorEstimate",
    "DefectReport",
    "QuadResult",
    "check_gate",
    "estimate_L_indicators",
    "structural_checkpoints",
    "feasibility_search",
    "apply_V_contraction",
    "solver_grid",
    "picard_solve",
    "initial_slope",
    "asymptote_defect",
    "witness_sequences",
    "scale_linear",
    "solve_pipeline",
]
