"""Trajectory data for the single- and double-period orbits (presets p1, p2).

Writes CSV with sampled values plus exact event rows, and the event logs as JSON.
"""

import sys
from pathlib import Path

from relaydde.exact import solve_exact
from relaydde.maps import fixed_point_double, fixed_point_single
from relaydde.params import PRESETS


def main(outdir="results"):
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    for name, fp_fn, periods in (("p1", fixed_point_single, 2), ("p2", fixed_point_double, 4)):
        P = PRESETS[name]
        fp = fp_fn(P)
        traj = solve_exact(P, fp.h_star, periods * P.T)
        (out / f"orbit_{name}.csv").write_text(traj.to_csv(resolution=0.01))
        (out / f"orbit_{name}_events.json").write_text(traj.events_json() + "\n")
        print(f"{name}: h* = {fp.h_star!r}, multiplier = {fp.multiplier!r}, zeros = {traj.zeros}")


if __name__ == "__main__":
    main(*sys.argv[1:])
