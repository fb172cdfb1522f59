"""Smoothed fixed point and multiplier along a delta sequence (preset p1).

    python scripts/convergence_study.py [outdir] [workers]
"""

import sys
import time
from pathlib import Path

from relaydde import experiments as ex
from relaydde.params import PRESETS


def main(outdir="results", workers="1"):
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    P = PRESETS["p1"]
    t0 = time.perf_counter()
    rep = ex.smoothing_convergence_study(P, (1e-2, 1e-3, 1e-4), workers=int(workers))
    elapsed = time.perf_counter() - t0
    (out / "convergence_report.csv").write_text(rep.to_csv())
    (out / "convergence_report.json").write_text(ex.summary_json(convergence=rep) + "\n")

    print(f"h* = {rep.h_star!r}, m = {rep.m!r}")
    print(f"{'delta':>8} {'R(delta)':>11} {'|h~ - h*|':>11} {'predicted':>11} {'|lam - m|':>11} {'predicted':>11}")
    for r in rep.rows:
        if r.delta == 0:
            continue
        print(f"{r.delta:8.0e} {r.R_delta:11.4e} {r.abs_err_hstar:11.4e} {abs(r.h_tilde_predicted - rep.h_star):11.4e}"
              f" {r.abs_err_m:11.4e} {abs(r.lam_predicted - rep.m):11.4e}")
    print("log-log slopes:", {k: round(v, 3) for k, v in rep.slope_fit.items()})
    print(f"monotone: lambda {rep.lambda_monotone}, h {rep.h_monotone}; elapsed {elapsed:.2f} s")


if __name__ == "__main__":
    main(*sys.argv[1:])
