"""Observed order of the RK4 method of steps on the smoothed equation.

Errors at x(T) are measured against a Richardson-extrapolated reference from
the two finest grids. Flagged steps use a fixed number of substeps so the
effective step halves along with the base step.
"""

import math

from relaydde.integrator import period_map
from relaydde.params import PRESETS
from relaydde.smoothing import build_smoothing

SUBSTEPS = 32


def observed_orders(ns=(200, 400, 800, 1600, 3200), delta=1e-2, rho=1e-2):
    P = PRESETS["p1"]
    spec = build_smoothing(P, delta, rho)
    vals = {n: period_map(P, spec, spec.h_star, n, refine=SUBSTEPS).xT for n in ns}
    fine, finer = vals[ns[-2]], vals[ns[-1]]
    ref = finer + (finer - fine) / 15.0
    errs = {n: abs(vals[n] - ref) for n in ns[:-2]}
    return errs, {(a, b): math.log2(errs[a] / errs[b]) for a, b in zip(ns, ns[1:]) if b in errs}


if __name__ == "__main__":
    errs, orders = observed_orders()
    for n, e in errs.items():
        print(f"N={n:5d}  |x(T) - ref| = {e:.3e}")
    for (a, b), p in orders.items():
        print(f"order {a}->{b}: {p:.3f}")
