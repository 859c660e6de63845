"""
A solution between two rays
===========================

For a nonnegative coefficient the monotone iteration from ``u = c t``
produces a solution with ``c <= x/t <= c + d`` and a pseudo-wronskian that
is zero at the start and negative afterwards. The gate is a single
integral; ``exp(-t)`` fails it and ``t**-4 / 2`` passes.
"""

import numpy as np

from pseudowronskian import (
    MonotoneProblem,
    check_theorem5_hypotheses,
    identity,
    knaster_iterate,
    make_exponential,
    make_power,
    verify_band_and_limits,
)

w = identity()
for coeff in (make_exponential(), make_power(4.0), make_power(4.0, 0.5)):
    gate = check_theorem5_hypotheses(MonotoneProblem(coeff, w, 1.0, 1.0))
    print(f"{coeff.name:32s} integral {gate.integral:.6f} vs {gate.threshold}: "
          f"passed={gate.passed} certified={gate.certified}")

prob = MonotoneProblem(make_power(4.0, 0.5), w, 1.0, 1.0)
sol = knaster_iterate(prob)
print(f"{sol.diagnostics.iterations} monotone steps, nondecreasing: {sol.diagnostics.monotone_ok}")

band = verify_band_and_limits(sol, prob)
print(f"x/t ranges over [{band.min_ratio:.6f}, {band.max_ratio:.6f}]")
print(f"W at the start = {band.W0}, max W afterwards = {np.max(sol.wronskian.values[1:]):.3e}")
print(f"|x/t - 1| at t = {sol.t[-1]:g}: {band.ratio_defect:.2e} (bound {band.horizon_bound:.2e})")
