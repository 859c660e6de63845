"""
Cells of triangles
==================

``a(t) = b(t) / t**2`` where ``b`` is made of 9-unit cells of triangles with
heights ``k**-4 - (k+1)**-4``. The indicator ratios settle at +-9, the
contraction needs a later start time, and the witnesses of W sit exactly at
the cell checkpoints ``9k+2`` and ``9k+6``.
"""

import numpy as np

from pseudowronskian import (
    estimate_L_indicators,
    feasibility_search,
    identity,
    lp_report,
    make_triangular,
    picard_solve,
    triangular_checkpoint_tails,
    witness_sequences,
)
from pseudowronskian.lp import cell_bounds, cell_integrals
from pseudowronskian.oscillatory import structural_checkpoints

coeff = make_triangular(4)
w = identity()

# closed-form tails at the first checkpoints
for k in (1, 2, 3):
    s2, a2, s6, a6 = triangular_checkpoint_tails(coeff, k)
    print(f"k={k}: signed {s2:+.5f} / {s6:+.5f}, absolute {a2:.5f} / {a6:.5f}")

est = estimate_L_indicators(coeff, w, 1.0, structural_checkpoints(coeff, 2000), use_closed_form=True)
print(f"last ratios {est.ratios[-2]:.4f}, {est.ratios[-1]:.4f} (limits -9, +9)")

prob = feasibility_search(coeff, w, 1.0, [1.0, 0.5, 0.25], est)
print(f"eta = {prob.eta}, gate holds from t = {prob.t_start:.3f}")

sol = picard_solve(prob)
rep = witness_sequences(sol, prob, n_wanted=4, t_max=200.0)
print("negative witnesses:", rep.negative_witnesses)
print("positive witnesses:", rep.positive_witnesses)

# the Lp bound with p = 1/2, and the per-cell contributions against their bound
lp = lp_report(sol, 0.5)
print(f"int |y|^(1/2) = {lp.empirical_norm:.5f} <= {lp.theoretical_bound:.5f}")
ks = np.arange(1, 11)
for k, I, B in zip(ks, cell_integrals(coeff, 0.5, ks), cell_bounds(4, 0.5, ks)):
    print(f"  cell {k:2d}: {I:.3e} <= {B:.3e}")
