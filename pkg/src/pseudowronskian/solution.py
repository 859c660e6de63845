"""Result containers shared by the fixed-point solvers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import GridFunction
from .wronskian import OscillationReport, Trajectory


@dataclass(frozen=True)
class SolverDiagnostics:
    iterations: int
    converged: bool
    deltas: tuple[float, ...]
    ratios: tuple[float, ...] = ()
    max_ratio: float = 0.0
    q: float | None = None
    truncation_error: float = 0.0
    wrapup_bound: float = 0.0
    monotone_ok: bool | None = None
    grid_size: int = 0
    horizon: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "deltas": list(self.deltas),
            "ratios": list(self.ratios),
            "max_ratio": self.max_ratio,
            "q": self.q,
            "truncation_error": self.truncation_error,
            "wrapup_bound": self.wrapup_bound,
            "monotone_ok": self.monotone_ok,
            "grid_size": self.grid_size,
            "horizon": self.horizon,
            **self.extra,
        }


@dataclass(frozen=True)
class SolutionCandidate:
    """A converged fixed point with its reconstructed trajectory.

    ``fixed_point`` is y* (oscillatory solver) or u* (monotone solver).
    ``budget`` is a node-by-node error bound: on ``t |y_computed - y*|`` for
    the oscillatory solver and on ``|u_computed - u*| / t`` for the monotone
    one.
    """

    kind: str
    c: float
    fixed_point: GridFunction
    trajectory: Trajectory
    wronskian: GridFunction
    diagnostics: SolverDiagnostics
    budget: GridFunction | None = None
    problem: object = None
    witnesses: OscillationReport | None = None

    @property
    def t(self) -> np.ndarray:
        return self.fixed_point.abscissae
