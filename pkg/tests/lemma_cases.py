"""Random concave trajectories: a >= 0, w(x) = sign(x) |x|^lam and positive data."""

import numpy as np

from pseudowronskian import RKConfig, make_exponential, make_power, power, pseudo_wronskian, rk_integrate
from pseudowronskian.wronskian import infer_concavity


def draw_case(rng):
    if rng.uniform() < 0.5:
        coeff = make_power(rng.uniform(3.5, 6.0), rng.uniform(0.05, 2.0))
    else:
        coeff = make_exponential(rng.uniform(0.3, 2.0), rng.uniform(0.05, 2.0))
    w = power(float(rng.choice([0.5, 1.0, 1.5, 2.0, 3.0])))
    x0 = rng.uniform(0.1, 3.0)
    xp0 = rng.uniform(0.0, 3.0)
    return coeff, w, x0, xp0


def concave_trajectories(rng, n, horizon=30.0):
    """``n`` RK trajectories on which a(t) w(x(t)) >= 0, plus the number of draws discarded."""
    out, discarded = [], 0
    while len(out) < n:
        coeff, w, x0, xp0 = draw_case(rng)
        tr = rk_integrate(coeff, w, x0, xp0, 1.0, RKConfig(horizon=horizon))
        if infer_concavity(coeff, w, tr) != "nonpositive":
            discarded += 1
            continue
        out.append((coeff, w, tr))
    return out, discarded


def tw_rise(tr):
    """Largest increase of t W(t) between consecutive nodes and the resolution tolerance."""
    W = pseudo_wronskian(tr)
    tW = tr.t * W.values
    scale = 1.0 + float(np.max(np.abs(tr.x.values))) + float(np.max(np.abs(tr.t * tr.x_prime.values)))
    return float(np.max(np.diff(tW))), 1e-8 * scale
