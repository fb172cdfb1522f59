"""Table reproduction, smoothing convergence study and three-way cross-checks."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exact import solve_exact
from .integrator import estimate_lambda, find_fixed_point_numeric, integrate_smoothed, period_map
from .maps import (
    double_coefficients,
    double_transit,
    shape_conditions_double,
    shape_conditions_single,
    single_coefficients,
    single_transit,
)
from .params import Params
from .smoothing import build_smoothing, eta_coefficients, f_tilde_map_predict, predicted_fixed_point
from .tables import TABLE1, TABLE1_MU_ERRATA, TABLE2

ROUNDING = 0.005
TOLERANCE = 0.02
# residual thresholds for the three cross-check classes
CLOSED_FORM_TOL = 1e-10
SMOOTHED_OFF_WINDOW_TOL = 1e-8
MAP_TOL = 1e-6


def ordered_map(fn, items, workers: int = 1):
    """map() that may fan out over processes; results keep input order."""
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def tolerance_class(dev: float) -> str:
    if dev <= ROUNDING:
        return "rounding-consistent"
    if dev <= TOLERANCE:
        return "tolerated"
    return "mismatch"


@dataclass(frozen=True)
class TableRow:
    table: int
    index: int  # 1-based row number as printed
    params: Params
    reported: tuple  # (|slope|, intercept) as printed
    computed: tuple  # (slope, intercept) from the closed forms
    tolerance: float
    h_star: float
    multiplier: float
    shape_ok: bool
    shape_failed: tuple
    sim_residual: float  # |x(period) - h*| from the event-driven solver
    antiperiodic_residual: float | None = None
    printed_mu: float | None = None
    printed_T: float | None = None
    note: str = ""

    @property
    def deviation(self):
        return (abs(abs(self.computed[0]) - self.reported[0]), abs(self.computed[1] - self.reported[1]))

    @property
    def match(self) -> bool:
        return max(self.deviation) <= self.tolerance

    @property
    def status(self) -> str:
        return tolerance_class(max(self.deviation))

    @property
    def hypotheses_ok(self) -> bool:
        slope, icpt = self.computed
        return abs(slope) < 1.0 and (icpt > 0 if self.table == 1 else icpt < 0)

    def as_dict(self) -> dict:
        d_slope, d_icpt = self.deviation
        return {
            "table": self.table,
            "row": self.index,
            "params": self.params.as_dict(),
            "printed_mu": self.printed_mu,
            "printed_T": self.printed_T,
            "reported_abs_slope": self.reported[0],
            "reported_intercept": self.reported[1],
            "slope": self.computed[0],
            "intercept": self.computed[1],
            "dev_abs_slope": d_slope,
            "dev_intercept": d_icpt,
            "status": self.status,
            "match": self.match,
            "hypotheses_ok": self.hypotheses_ok,
            "h_star": self.h_star,
            "multiplier": self.multiplier,
            "shape_ok": self.shape_ok,
            "shape_failed": list(self.shape_failed),
            "sim_residual": self.sim_residual,
            "antiperiodic_residual": self.antiperiodic_residual,
            "note": self.note,
        }


def _table1_row(i, raw, tol, apply_errata):
    a1, a2, p1, p2, m_abs, b_rep, mu, T_printed = raw
    note = ""
    mu_used = mu
    if apply_errata and i in TABLE1_MU_ERRATA:
        mu_used = TABLE1_MU_ERRATA[i]
        note = f"printed mu={mu!r}; printed |m|, b reproduce with mu={mu_used!r}"
    P = Params(a1, a2, p1, p2, mu_used)
    m, b = single_coefficients(P)
    h = b / (1.0 - m)
    rep = shape_conditions_single(P, h) if h > 0 else None
    sim = abs(solve_exact(P, h, P.T).eval(P.T) - h) if h > 0 else math.nan
    if abs(P.T - T_printed) > 1e-12:
        note = (note + "; " if note else "") + f"printed T={T_printed!r}"
    return TableRow(
        table=1,
        index=i,
        params=P,
        reported=(m_abs, b_rep),
        computed=(m, b),
        tolerance=tol,
        h_star=h,
        multiplier=m,
        shape_ok=bool(rep and rep.satisfied),
        shape_failed=tuple(rep.failed()) if rep else ("h* > 0",),
        sim_residual=sim,
        printed_mu=mu,
        printed_T=T_printed,
        note=note,
    )


def reproduce_table1(tol: float = TOLERANCE, apply_errata: bool = True):
    return [_table1_row(i, raw, tol, apply_errata) for i, raw in enumerate(TABLE1, 1)]


def _antiperiodic_residual(P: Params, h: float, samples: int = 2001):
    traj = solve_exact(P, h, 2.0 * P.T)
    t = np.linspace(0.0, P.T, samples)
    resid = float(np.max(np.abs(traj.eval(t + P.T) + traj.eval(t))))
    return resid, abs(traj.eval(2.0 * P.T) - h)


def _table2_row(i, raw, tol):
    a1, a2, p1, p2, k_abs, d_rep, mu, T_printed = raw
    P = Params(a1, a2, p1, p2, mu)
    k, d = double_coefficients(P)
    h = -d / (1.0 + k)
    rep = shape_conditions_double(P, h) if h > 0 else None
    anti, ret = _antiperiodic_residual(P, h) if h > 0 else (math.nan, math.nan)
    note = ""
    if abs(2.0 * P.T - T_printed) > 1e-12:
        note = f"printed T={T_printed!r} differs from 2(p1+p2)={2 * P.T!r}"
    row = TableRow(
        table=2,
        index=i,
        params=P,
        reported=(k_abs, d_rep),
        computed=(k, d),
        tolerance=tol,
        h_star=h,
        multiplier=k * k,
        shape_ok=bool(rep and rep.satisfied),
        shape_failed=tuple(rep.failed()) if rep else ("h* > 0",),
        sim_residual=ret,
        antiperiodic_residual=anti,
        printed_mu=mu,
        printed_T=T_printed,
        note=note,
    )
    if row.status != "rounding-consistent":
        flag = f"{row.status}: computed d={d:.4f} vs printed {d_rep}" if row.deviation[1] > ROUNDING else (
            f"{row.status}: computed |k|={abs(k):.4f} vs printed {k_abs}"
        )
        row = TableRow(**{**row.__dict__, "note": (note + "; " if note else "") + flag})
    return row


def reproduce_table2(tol: float = TOLERANCE):
    return [_table2_row(i, raw, tol) for i, raw in enumerate(TABLE2, 1)]


TABLE_COLUMNS = (
    "row", "a1", "a2", "p1", "p2", "mu", "reported_abs_slope", "reported_intercept", "slope",
    "intercept", "dev_abs_slope", "dev_intercept", "status", "match", "h_star", "multiplier",
    "shape_ok", "sim_residual", "note",
)


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    return "" if v is None else str(v)


def table_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    for r in rows:
        d = r.as_dict()
        flat = {**d, **{k: d["params"][k] for k in ("a1", "a2", "p1", "p2", "mu")}}
        w.writerow([_fmt(flat[c]) for c in TABLE_COLUMNS])
    return buf.getvalue()


def table_summary(rows) -> dict:
    statuses = [r.status for r in rows]
    return {
        "rows": len(rows),
        "match": sum(r.match for r in rows),
        "rounding_consistent": statuses.count("rounding-consistent"),
        "tolerated": statuses.count("tolerated"),
        "mismatch": statuses.count("mismatch"),
        "shape_ok": sum(r.shape_ok for r in rows),
        "flagged": [r.index for r in rows if r.status != "rounding-consistent"],
    }


# --- smoothing convergence ----------------------------------------------------


@dataclass(frozen=True)
class ConvergenceRow:
    delta: float
    R_delta: float
    h_tilde: float
    h_tilde_predicted: float
    lam: float
    lam_predicted: float
    abs_err_m: float
    abs_err_hstar: float
    displacement_bound: float  # |eta R| / (1 - |m|) + 1e-7
    map_checks: tuple = ()  # (h, predicted, probed, allowed)

    @property
    def map_ok(self) -> bool:
        return all(abs(p - q) <= tol for _, p, q, tol in self.map_checks)

    def as_dict(self) -> dict:
        return {
            "delta": self.delta,
            "R_delta": self.R_delta,
            "h_tilde": self.h_tilde,
            "h_tilde_predicted": self.h_tilde_predicted,
            "lambda": self.lam,
            "lambda_predicted": self.lam_predicted,
            "abs_err_m": self.abs_err_m,
            "abs_err_hstar": self.abs_err_hstar,
            "displacement_bound": self.displacement_bound,
            "map_checks": [
                {"h": h, "predicted": p, "probed": q, "allowed": tol} for h, p, q, tol in self.map_checks
            ],
            "map_ok": self.map_ok,
        }


@dataclass(frozen=True)
class ConvergenceReport:
    params: Params
    h_star: float
    m: float
    rows: tuple
    slope_fit: dict = field(default_factory=dict)

    @property
    def lambda_monotone(self) -> bool:
        e = [r.abs_err_m for r in self.rows if r.delta > 0]
        return all(b < a for a, b in zip(e, e[1:]))

    @property
    def h_monotone(self) -> bool:
        e = [r.abs_err_hstar for r in self.rows if r.delta > 0]
        return all(b < a for a, b in zip(e, e[1:]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["delta", "lambda", "h_tilde", "abs_err_m", "abs_err_hstar"])
        for r in self.rows:
            w.writerow([_fmt(float(v)) for v in (r.delta, r.lam, r.h_tilde, r.abs_err_m, r.abs_err_hstar)])
        return buf.getvalue()

    def as_dict(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "h_star": self.h_star,
            "m": self.m,
            "rows": [r.as_dict() for r in self.rows],
            "slope_fit": dict(self.slope_fit),
            "lambda_monotone": self.lambda_monotone,
            "h_monotone": self.h_monotone,
        }


def _loglog_slope(x, y):
    x, y = np.asarray(x, float), np.asarray(y, float)
    ok = (x > 0) & (y > 0)
    if ok.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


def convergence_point(args):
    """One delta of the study; module-level so it can run in a worker process."""
    params, delta, rho, n, eps, offsets = args
    m, _ = single_coefficients(params)
    spec = build_smoothing(params, delta, rho)
    fp = find_fixed_point_numeric(params, spec, n)
    h_pred, lam_pred = predicted_fixed_point(spec)
    lam = estimate_lambda(params, spec, fp.h, n, eps=eps)
    e0, e1 = eta_coefficients(delta, params)
    bound = abs((e0 + e1 * spec.h_star) * spec.R_delta) / (1.0 - abs(m)) + 1e-7
    checks = []
    for off in offsets:
        h = spec.h_star + off
        checks.append(
            (h, f_tilde_map_predict(h, spec), period_map(params, spec, h, n).xT, 1e-6 + 0.1 * abs(spec.R_delta))
        )
    return ConvergenceRow(
        delta=delta,
        R_delta=spec.R_delta,
        h_tilde=fp.h,
        h_tilde_predicted=h_pred,
        lam=lam,
        lam_predicted=lam_pred,
        abs_err_m=abs(lam - m),
        abs_err_hstar=abs(fp.h - spec.h_star),
        displacement_bound=bound,
        map_checks=tuple(checks),
    )


def smoothing_convergence_study(
    params: Params,
    deltas=(1e-2, 1e-3, 1e-4),
    rho: float = 1e-3,
    n: int = 1000,
    eps: float = 0.05,
    offsets=(-0.05, 0.0, 0.05),
    workers: int = 1,
    sentinel: bool = True,
) -> ConvergenceReport:
    """Fixed point and multiplier of the smoothed period map along a delta sequence.

    ``eps`` is the half-width of the central difference for lambda. The period
    map is affine in h near h*, so a wide stencil loses nothing and keeps
    rounding noise (about 1e-13 in x(T)) far below the quantity measured.
    """
    m, b = single_coefficients(params)
    h_star = b / (1.0 - m)
    rows = ordered_map(convergence_point, [(params, d, rho, n, eps, offsets) for d in deltas], workers)
    fit = {
        "abs_err_m_vs_delta": _loglog_slope([r.delta for r in rows], [r.abs_err_m for r in rows]),
        "abs_err_hstar_vs_delta": _loglog_slope([r.delta for r in rows], [r.abs_err_hstar for r in rows]),
        "R_vs_delta": _loglog_slope([r.delta for r in rows], [abs(r.R_delta) for r in rows]),
    }
    if sentinel:
        rows = rows + [ConvergenceRow(0.0, 0.0, h_star, h_star, m, m, 0.0, 0.0, 0.0)]
    return ConvergenceReport(params, h_star, m, tuple(rows), fit)


# --- three-way cross-check ------------------------------------------------------


@dataclass(frozen=True)
class CrossCheck:
    regime: str
    h: float
    residuals: dict
    thresholds: dict
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.residuals[k] <= self.thresholds[k] for k in self.thresholds)

    def as_dict(self) -> dict:
        return {
            "regime": self.regime,
            "h": self.h,
            "residuals": dict(self.residuals),
            "thresholds": dict(self.thresholds),
            "ok": self.ok,
            "details": dict(self.details),
        }


def _rel(a, b):
    return abs(a - b) / max(1.0, abs(b))


def smoothed_vs_exact(params: Params, spec, h: float, n: int = 1000):
    """Compare the smoothed numerical solution with the relay solution on [0, T]."""
    traj = integrate_smoothed(params, spec, h, params.T, n)
    exact = solve_exact(params, h, params.T)
    t = traj.t
    diff = traj.x - exact.eval(t)
    inside = np.zeros(t.size, dtype=bool)
    for a, b in spec.exceptional_intervals(h):
        inside |= (t >= a) & (t <= b)
    tr = single_transit(params, h)
    tail_start = tr.t2 + 1.0 + spec.thetas[2]
    tail = t >= tail_start
    tail_model = np.exp(-params.mu * (t[tail] - tail_start)) * spec.R_delta
    sup_all = float(np.max(np.abs(diff)))
    return {
        "sup_all": sup_all,
        "sup_off_exceptional": float(np.max(np.abs(diff[~inside]))),
        "empirical_C": sup_all / spec.delta,
        "tail_formula_residual": float(np.max(np.abs(diff[tail] - tail_model))) if tail.any() else 0.0,
        "tail_allowed": 1e-8 + 0.1 * abs(spec.R_delta),
        "nodes": int(t.size),
    }


def oracle_crosscheck(
    params: Params,
    h: float | None = None,
    regime: str = "single",
    delta: float = 1e-3,
    rho: float = 1e-3,
    n: int = 1000,
) -> CrossCheck:
    if regime == "double":
        k, d = double_coefficients(params)
        h = -d / (1.0 + k) if h is None else h
        tr = double_transit(params, h)
        traj = solve_exact(params, h, 2.0 * params.T)
        zeros = traj.zeros
        closed = max(
            _rel(zeros[0], tr.t1),
            _rel(traj.eval(params.p1), tr.x1),
            _rel(traj.eval(tr.t1 + 1.0), tr.x2),
            _rel(traj.eval(params.T), tr.x3),
            _rel(traj.eval(params.T), k * h + d),
        )
        anti, ret = _antiperiodic_residual(params, h)
        return CrossCheck(
            "double",
            h,
            {"closed_form": closed, "antiperiodic": anti, "return_2T": ret},
            {"closed_form": CLOSED_FORM_TOL, "antiperiodic": 1e-9, "return_2T": 1e-9},
            {"k": k, "d": d, "shape": shape_conditions_double(params, h).as_dict()},
        )

    m, b = single_coefficients(params)
    h = b / (1.0 - m) if h is None else h
    tr = single_transit(params, h)
    traj = solve_exact(params, h, params.T)
    zeros = traj.zeros
    closed = max(
        _rel(zeros[0], tr.t1),
        _rel(zeros[1], tr.t2),
        _rel(traj.eval(tr.t1 + 1.0), tr.x1),
        _rel(traj.eval(params.p1), tr.x2),
        _rel(traj.eval(tr.t2 + 1.0), tr.x3),
        _rel(traj.eval(params.T), tr.x4),
        _rel(traj.eval(params.T), m * h + b),
    )
    spec = build_smoothing(params, delta, rho)
    sm = smoothed_vs_exact(params, spec, h, n)
    probes = []
    for off in (-0.05, 0.0, 0.05):
        hh = h + off
        probes.append(abs(period_map(params, spec, hh, n).xT - f_tilde_map_predict(hh, spec)))
    return CrossCheck(
        "single",
        h,
        {
            "closed_form": closed,
            "smoothed_off_exceptional": sm["sup_off_exceptional"],
            "map_prediction": max(probes),
        },
        {
            "closed_form": CLOSED_FORM_TOL,
            "smoothed_off_exceptional": SMOOTHED_OFF_WINDOW_TOL,
            "map_prediction": MAP_TOL,
        },
        {"smoothed": sm, "delta": delta, "rho": rho, "R_delta": spec.R_delta},
    )


def summary_json(table1=None, table2=None, convergence=None, crosschecks=()) -> str:
    out = {}
    if table1 is not None:
        out["table1"] = {"summary": table_summary(table1), "rows": [r.as_dict() for r in table1]}
    if table2 is not None:
        out["table2"] = {"summary": table_summary(table2), "rows": [r.as_dict() for r in table2]}
    if convergence is not None:
        out["convergence"] = convergence.as_dict()
    if crosschecks:
        out["crosschecks"] = [c.as_dict() for c in crosschecks]
    return json.dumps(out, indent=2, allow_nan=True)
