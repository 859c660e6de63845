"""Command-line scenario runner.

Each subcommand reads a dotted-key config (``--config``), applies
``--preset`` and ``--set key=value`` overrides, runs one pipeline and
writes CSV and JSON artifacts into the output directory. The JSON report
embeds the resolved config and is byte-identical across repeated runs.

Exit codes: 0 success, 2 hypothesis gate failed or infeasible, 3 no
convergence, 4 config error, 5 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .coefficients import (
    make_exp_cos,
    make_triangular,
    triangular_checkpoint_tails,
    triangular_ratio_sequence,
)
from .config import ConfigError, ScenarioConfig, parse_overrides
from .core import Coefficient
from .errors import (
    Infeasible,
    InvalidArgument,
    NoConvergence,
    PreconditionViolation,
    PseudoWronskianError,
)
from .lp import cell_bounds, cell_integrals, lp_report
from .monotone import MonotoneProblem, check_theorem5_hypotheses, knaster_iterate, verify_band_and_limits
from .oscillatory import (
    OscProblem,
    asymptote_defect,
    estimate_L_indicators,
    feasibility_search,
    picard_solve,
    structural_checkpoints,
    witness_sequences,
)
from .quadrature import finite_integral, tail_integral_abs, tail_integral_signed
from .reports import write_csv, write_indicators, write_json, write_trajectory, write_witnesses
from .verifier import RKConfig, agreement, anchored_agreements, rk_integrate

EXIT_OK = 0
EXIT_GATE = 2
EXIT_NO_CONVERGENCE = 3
EXIT_CONFIG = 4
EXIT_NUMERIC = 5


# --------------------------------------------------------------------------- #
# Pipelines
# --------------------------------------------------------------------------- #


def _indicator_checkpoints(cfg: ScenarioConfig, coeff: Coefficient) -> np.ndarray:
    if coeff.checkpoints is not None:
        return structural_checkpoints(coeff, cfg["indicators.k_max"])
    t0 = cfg.t_start(coeff)
    return np.linspace(t0, cfg["indicators.t_max"], cfg["indicators.n"])


def run_tails(cfg: ScenarioConfig, out: Path) -> tuple[int, dict]:
    coeff = cfg.coefficient()
    tol = cfg["tolerance.quadrature"]
    ts = np.linspace(max(cfg["tails.t_min"], coeff.domain_start), cfg["tails.t_max"], cfg["tails.n"])
    rows, worst = [], 0.0
    for t in ts:
        s = tail_integral_signed(coeff, float(t), tol)
        a = tail_integral_abs(coeff, float(t), tol)
        s_ref = math.nan if s.reference is None else s.reference
        a_ref = math.nan if a.reference is None else a.reference
        if s.reference is not None:
            worst = max(worst, abs(s.value - s_ref))
        rows.append((t, s.value, s_ref, s.budget, a.value, a_ref, a.budget))
    write_csv(out / "tails.csv", ("t", "signed", "signed_reference", "signed_budget",
                                  "abs", "abs_reference", "abs_budget"), rows)
    return EXIT_OK, {"coefficient": coeff.name, "points": len(rows), "max_signed_deviation": worst}


def run_indicators(cfg: ScenarioConfig, out: Path):
    coeff, w = cfg.coefficient(), cfg.nonlinearity()
    est = estimate_L_indicators(
        coeff, w, cfg["problem.c"], _indicator_checkpoints(cfg, coeff),
        tol=cfg["tolerance.quadrature"], margin_frac=cfg["indicators.margin"],
        use_closed_form=cfg["indicators.closed_form"],
    )
    write_indicators(out / "indicators.csv", est)
    ratios = est.ratios[~est.skipped]
    pos, neg = ratios[ratios > 0], ratios[ratios < 0]
    summary = est.to_dict()
    summary["trend"] = {
        "last_positive": float(pos[-1]) if pos.size else None,
        "last_negative": float(neg[-1]) if neg.size else None,
    }
    if "alpha" in coeff.params:
        summary["trend"]["limit_plus"] = 9.0 * coeff.params["alpha"] / 4.0
        summary["trend"]["limit_minus"] = -9.0 * coeff.params["alpha"] / 4.0
    return EXIT_OK, summary, est


def _oscillatory_problem(cfg: ScenarioConfig):
    coeff, w = cfg.coefficient(), cfg.nonlinearity()
    est = estimate_L_indicators(
        coeff, w, cfg["problem.c"], _indicator_checkpoints(cfg, coeff),
        tol=cfg["tolerance.quadrature"], margin_frac=cfg["indicators.margin"],
        use_closed_form=cfg["indicators.closed_form"],
    )
    t0 = cfg.t_start(coeff)
    t_grid = np.unique(np.concatenate([[t0], t0 * np.geomspace(1.0, 1e4, 161)]))
    prob = feasibility_search(coeff, w, cfg["problem.c"], cfg["problem.eta_grid"], est,
                              t_grid=t_grid, solve_tol=cfg["tolerance.picard"])
    return prob, est


def _solve_oscillatory(cfg: ScenarioConfig):
    prob, est = _oscillatory_problem(cfg)
    sol = picard_solve(prob, max_iter=cfg["solver.max_iter"], horizon=cfg["grid.horizon"],
                       density=cfg["grid.density"])
    return prob, est, sol


def run_solve_oscillatory(cfg: ScenarioConfig, out: Path):
    prob, est, sol = _solve_oscillatory(cfg)
    report = witness_sequences(sol, prob, cfg["witness.n_wanted"], t_max=cfg["witness.t_max"])
    sol = dataclasses.replace(sol, witnesses=report)
    t = sol.t
    sample = t[(t >= t[0]) & (t <= cfg["witness.t_max"])][:: max(1, t.size // 400)]
    defect = asymptote_defect(sol, prob.c, sample)
    tr = sol.trajectory
    write_trajectory(out / "trajectory.csv", t, tr.x.values, tr.x_prime.values, sol.wronskian.values)
    write_witnesses(out / "witnesses.csv", report)
    write_indicators(out / "indicators.csv", est)
    return EXIT_OK, {
        "problem": _problem_dict(prob),
        "indicators": {"verdict": est.verdict, "L_plus_observed": est.L_plus_observed,
                       "L_minus_observed": est.L_minus_observed, "margin": est.margin},
        "diagnostics": sol.diagnostics.to_dict(),
        "initial_data": {"x": float(tr.x.values[0]), "x_prime": float(tr.x_prime.values[0])},
        "error_budget": {"max_node_budget": float(sol.budget.values.max()),
                         "wrapup_bound": sol.diagnostics.wrapup_bound,
                         "truncation_error": sol.diagnostics.truncation_error},
        "witnesses": report.to_dict(),
        "certified_pairs": report.n_pairs,
        "asymptote_defect": {"final": defect.final_defect, "within_bound": defect.within_bound,
                             "decreasing": defect.decreasing},
    }


def _problem_dict(prob: OscProblem) -> dict:
    return {"coefficient": prob.coeff.name, "nonlinearity": prob.w.name, "c": prob.c,
            "eta": prob.eta, "t_start": prob.t_start, "q": prob.q, "gate": prob.gate}


def _monotone_problem(cfg: ScenarioConfig) -> MonotoneProblem:
    coeff = cfg.coefficient()
    return MonotoneProblem(coeff, cfg.nonlinearity(), cfg["problem.c"], cfg["problem.d"],
                           tol=cfg["tolerance.knaster"], horizon=cfg["monotone.horizon"],
                           density=cfg["monotone.density"])


def run_solve_monotone(cfg: ScenarioConfig, out: Path):
    prob = _monotone_problem(cfg)
    gate = check_theorem5_hypotheses(prob, cfg["tolerance.quadrature"])
    payload = {"gate": gate.to_dict(), "coefficient": prob.coeff.name, "nonlinearity": prob.w.name,
               "c": prob.c, "d": prob.d}
    if not gate.passed:
        return EXIT_GATE, payload
    sol = knaster_iterate(prob, max_iter=cfg["solver.max_iter"], check_gate_first=False)
    band = verify_band_and_limits(sol, prob)
    tr = sol.trajectory
    write_trajectory(out / "trajectory.csv", sol.t, tr.x.values, tr.x_prime.values, sol.wronskian.values)
    payload.update({"diagnostics": sol.diagnostics.to_dict(), "band": band.to_dict(),
                    "error_budget": {"max_node_budget": float(sol.budget.values.max())}})
    return EXIT_OK, payload


def run_lp(cfg: ScenarioConfig, out: Path):
    prob, _, sol = _solve_oscillatory(cfg)
    p = cfg["problem.p"]
    rep = lp_report(sol, p, cfg["tolerance.quadrature"], max_horizon=cfg["lp.max_horizon"],
                    flat_threshold=cfg["lp.flat_threshold"])
    payload = {"problem": _problem_dict(prob), "lp": rep.to_dict()}
    if "alpha" in prob.coeff.params:
        ks = np.arange(1, cfg["lp.k_max"] + 1)
        I = cell_integrals(prob.coeff, p, ks)
        bounds = cell_bounds(prob.coeff.params["alpha"], p, ks)
        write_csv(out / "cells.csv", ("k", "I_k", "bound"), zip(ks, I, bounds))
        payload["cells"] = {"k_max": int(ks[-1]), "all_dominated": bool(np.all(I <= bounds)),
                            "max_ratio": float(np.max(I / bounds))}
    return EXIT_OK, payload


def run_verify(cfg: ScenarioConfig, out: Path):
    _, _, sol = _solve_oscillatory(cfg)
    tr = sol.trajectory
    t0 = float(sol.t[0])
    rk_cfg = RKConfig(cfg["tolerance.rk_rel"], cfg["tolerance.rk_abs"], horizon=cfg["verify.horizon"])
    grid = sol.t[sol.t <= rk_cfg.horizon]
    rk = rk_integrate(sol.problem.coeff, sol.problem.w, float(tr.x.values[0]), float(tr.x_prime.values[0]),
                      t0, rk_cfg, grid=grid)
    sup = agreement(tr, rk)
    anchors = [a for a in cfg["verify.anchors"] if t0 < a < rk_cfg.horizon]
    anchored = anchored_agreements(sol.problem.coeff, sol.problem.w, tr, anchors, rk_cfg)
    write_trajectory(out / "rk_trajectory.csv", rk.t, rk.x.values, rk.x_prime.values,
                     rk.x_prime.values - rk.x.values / rk.t)
    return EXIT_OK, {"agreement_sup": sup, "agreement_scaled_sup": agreement(tr, rk, "scaled-sup"),
                     "anchored": {str(k): v for k, v in anchored.items()},
                     "rk": {"rel_tol": rk_cfg.rel_tol, "abs_tol": rk_cfg.abs_tol, "horizon": rk_cfg.horizon},
                     "solver_budget": float(sol.budget.values.max())}


def run_examples(cfg: ScenarioConfig, out: Path):
    """Regression checks of the two closed-form example coefficients."""
    checks = []

    def record(name, value, expected, tol):
        ok = bool(abs(value - expected) <= tol)
        checks.append({"name": name, "value": value, "expected": expected, "tol": tol, "pass": ok})

    ec = make_exp_cos()
    for t in (1.0, 5 * math.pi / 4, 5.0, 12.0):
        r = tail_integral_signed(ec, t, 1e-10)
        record(f"exp-cos signed tail at {t:.6g}", r.value, float(ec.signed_tail(t)), 1e-8)
    abs1 = tail_integral_abs(ec, 1.0, 1e-10)
    checks.append({"name": "exp-cos abs tail at 1 below exp(-1)", "value": abs1.value,
                   "expected": math.exp(-1), "tol": 0.0,
                   "pass": bool(abs1.value + abs1.budget <= math.exp(-1))})
    alpha = int(cfg["problem.alpha"])
    tri = make_triangular(alpha)
    for k in (1, 10, 100):
        s2, a2, s6, a6 = triangular_checkpoint_tails(tri, k)
        for label, t, ref, fn in (("signed", 9 * k + 2, s2, tail_integral_signed),
                                  ("abs", 9 * k + 2, a2, tail_integral_abs),
                                  ("signed", 9 * k + 6, s6, tail_integral_signed),
                                  ("abs", 9 * k + 6, a6, tail_integral_abs)):
            r = fn(tri, float(t), 1e-11)
            record(f"cells {label} tail at {t}", r.value, ref, 1e-10)
        b = lambda s: s * s * tri.func(s)  # noqa: E731
        for lo in (9 * k, 9 * k + 4):
            r = finite_integral(b, lo, lo + 4, 1e-12, points=np.arange(lo + 1, lo + 4))
            record(f"cells half-cell integral from {lo}", r.value, 0.0, 1e-10)
    rp, rm = triangular_ratio_sequence(alpha, [1000, 100000])
    lim = 9 * alpha / 4
    record("cells ratio at 9k+6, k=1e3", rp[0], lim, 0.05 * lim)
    record("cells ratio at 9k+2, k=1e3", rm[0], -lim, 0.05 * lim)
    record("cells ratio at 9k+6, k=1e5", rp[1], lim, 0.005 * lim)
    record("cells ratio at 9k+2, k=1e5", rm[1], -lim, 0.005 * lim)
    write_csv(out / "examples.csv", ("name", "value", "expected", "tol", "pass"),
              ((c["name"], c["value"], c["expected"], c["tol"], c["pass"]) for c in checks))
    ok = all(c["pass"] for c in checks)
    return (EXIT_OK if ok else EXIT_NUMERIC), {"checks": checks, "all_pass": ok}


COMMANDS = {
    "tails": run_tails,
    "indicators": lambda cfg, out: run_indicators(cfg, out)[:2],
    "solve-oscillatory": run_solve_oscillatory,
    "solve-monotone": run_solve_monotone,
    "lp": run_lp,
    "verify": run_verify,
    "examples": run_examples,
}


# --------------------------------------------------------------------------- #
# Entry point
# --------------------------------------------------------------------------- #


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pseudowronskian", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="dotted-key config file")
    ap.add_argument("--out", help="output directory (default: output.dir, then $PSEUDOWRONSKIAN_OUT, then ./pw-out)")
    ap.add_argument("--preset", help="coefficient preset, e.g. exp-cos or tri-cells:alpha=4")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="override a config key (repeatable)")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = parse_overrides(args.set)
        if args.preset:
            overrides["coefficient.preset"] = args.preset
        cfg = ScenarioConfig.load(args.config, overrides)
    except (ConfigError, InvalidArgument) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = cfg.output_dir(args.out)
    status, payload, error = EXIT_OK, {}, None
    try:
        status, payload = COMMANDS[args.command](cfg, out)
    except (PreconditionViolation, Infeasible) as exc:
        status, error = EXIT_GATE, exc
        payload = {"diagnostics": getattr(exc, "diagnostics", {})}
    except NoConvergence as exc:
        status, error = EXIT_NO_CONVERGENCE, exc
    except ConfigError as exc:
        status, error = EXIT_CONFIG, exc
    except PseudoWronskianError as exc:
        status, error = EXIT_NUMERIC, exc
    report = {
        "command": args.command,
        "exit_code": status,
        "config": cfg.to_dict(),
        "result": payload,
        "error": None if error is None else {"type": type(error).__name__, "message": str(error)},
    }
    write_json(out / f"{args.command}.json", report)
    if error is not None:
        print(f"{args.command}: {type(error).__name__}: {error}", file=sys.stderr)
    else:
        print(f"{args.command}: exit {status}, report in {out / (args.command + '.json')}")
    return status


if __name__ == "__main__":
    raise SystemExit(main())
