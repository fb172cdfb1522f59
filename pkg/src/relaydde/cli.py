"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 hypothesis or shape failure,
3 a cross-check residual above its threshold.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import experiments as ex
from .exact import solve_exact
from .integrator import GridMisaligned, integrate_smoothed
from .maps import (
    HypothesisFailed,
    ShapeFailed,
    double_coefficients,
    fixed_point_double,
    fixed_point_single,
    shape_conditions_double,
    shape_conditions_single,
    single_coefficients,
)
from .params import PARAM_NAMES, PRESETS, NonPositiveParameter, Params, params_from_mapping, read_config
from .smoothing import DeltaTooLarge, NoAdmissibleMixing, WindowTooWide, build_smoothing
from .tables import TABLE1, TABLE1_MU_ERRATA, TABLE2

EXIT_OK, EXIT_INPUT, EXIT_HYPOTHESIS, EXIT_RESIDUAL = 0, 1, 2, 3


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _float_list(s):
    try:
        return [float(v) for v in s.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _add_params(p):
    g = p.add_argument_group("parameters")
    for name in PARAM_NAMES:
        g.add_argument(f"--{name}", type=float)
    g.add_argument("--config", type=Path, help="key = value file with a1, a2, p1, p2, mu")
    g.add_argument("--preset", choices=sorted(PRESETS))


def _params(args) -> Params:
    values = {}
    if args.preset:
        values.update(PRESETS[args.preset].as_dict())
    if args.config:
        try:
            values.update(read_config(args.config))
        except (OSError, ValueError) as e:
            raise InputError(f"--config: {e}") from None
    for name in PARAM_NAMES:
        v = getattr(args, name)
        if v is not None:
            values[name] = v
    missing = [n for n in PARAM_NAMES if n not in values]
    if missing:
        raise InputError("missing " + ", ".join(f"--{n}" for n in missing))
    try:
        return params_from_mapping(values)
    except NonPositiveParameter as e:
        raise InputError("; ".join(f"--{n}: {n} must be > 0 (got {v!r})" for n, v in e.violations)) from None
    except ValueError as e:
        raise InputError(str(e)) from None


def _emit(text: str, path):
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        Path(path).write_text(text if text.endswith("\n") else text + "\n")


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2)


def _table_match(P: Params):
    for number, table in ((1, TABLE1), (2, TABLE2)):
        for i, raw in enumerate(table, 1):
            mu = TABLE1_MU_ERRATA.get(i, raw[6]) if number == 1 else raw[6]
            candidates = {raw[6], mu}
            if tuple(raw[:4]) == (P.a1, P.a2, P.p1, P.p2) and P.mu in candidates:
                row = ex._table1_row(i, raw, ex.TOLERANCE, P.mu != raw[6]) if number == 1 else ex._table2_row(
                    i, raw, ex.TOLERANCE
                )
                return {"table": number, "row": i, "status": row.status, "match": row.match}
    return None


# --- subcommands ---------------------------------------------------------------


def cmd_analyze(args) -> int:
    P = _params(args)
    m, b = single_coefficients(P)
    k, d = double_coefficients(P)
    report = {"params": P.as_dict(), "m": m, "b": b, "k": k, "d": d}
    hyp = {
        "single": {"|m| < 1": abs(m) < 1.0, "b > 0": b > 0},
        "double": {"|k| < 1": abs(k) < 1.0, "d < 0": d < 0},
    }
    h_single = b / (1.0 - m) if hyp["single"]["|m| < 1"] else None
    h_double = -d / (1.0 + k) if abs(k) < 1.0 else None
    report["h_star_single"] = h_single
    report["h_star_double"] = h_double
    report["multipliers"] = {"single": m, "double": k * k}
    report["hypotheses"] = hyp
    shapes = {}
    if h_single is not None and h_single > 0:
        shapes["single"] = shape_conditions_single(P, h_single).as_dict()
    if h_double is not None and h_double > 0:
        shapes["double"] = shape_conditions_double(P, h_double).as_dict()
    report["shape_reports"] = shapes
    report["table_row_match"] = _table_match(P)
    _emit(_dumps(report), args.out)
    return EXIT_OK if all(hyp[args.regime].values()) else EXIT_HYPOTHESIS


def _resolve_h(P, args):
    if args.h != "auto":
        try:
            return float(args.h)
        except ValueError:
            raise InputError(f"--h: expected a number or 'auto' (got {args.h!r})") from None
    try:
        fp = fixed_point_single(P, False) if args.regime == "single" else fixed_point_double(P, False)
    except HypothesisFailed as e:
        raise _Hypothesis(str(e)) from None
    return fp.h_star


class _Hypothesis(Exception):
    pass


def cmd_simulate(args) -> int:
    P = _params(args)
    h = _resolve_h(P, args)
    if args.negative_history and h > 0:
        h = -h
    horizon = args.periods * P.T
    if args.smoothed:
        if args.delta is None or args.rho is None:
            raise InputError("--smoothed needs --delta and --rho")
        spec = build_smoothing(P, args.delta, args.rho)
        traj = integrate_smoothed(P, spec, h, horizon, args.step)
        _emit(traj.to_csv(), args.out)
        return EXIT_OK

    if h == 0 or not math.isfinite(h):
        raise InputError("--h: need a finite nonzero value")
    if args.check_shape:
        # shape of the positive-side orbit; by oddness the negative start mirrors it
        hh = abs(h)
        for i in range(args.periods):
            rep = shape_conditions_single(P, hh) if args.regime == "single" else shape_conditions_double(P, hh)
            if not rep.satisfied:
                print(f"period {i}: shape condition(s) fail: {', '.join(rep.failed())}", file=sys.stderr)
                return EXIT_HYPOTHESIS
            if args.regime == "double":
                break
            hh = solve_exact(P, hh, P.T).eval(P.T)
    traj = solve_exact(P, h, horizon)
    _emit(traj.to_csv(resolution=args.resolution), args.out)
    if args.events:
        Path(args.events).write_text(traj.events_json() + "\n")
    return EXIT_OK


def cmd_smooth(args) -> int:
    P = _params(args)
    spec = build_smoothing(P, args.delta, args.rho)
    _emit(spec.to_json(), args.out)
    if args.samples:
        Path(args.samples).write_text(spec.samples_csv())
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.table == 1:
        rows = ex.reproduce_table1(args.tol, apply_errata=not args.no_errata)
    else:
        rows = ex.reproduce_table2(args.tol)
    _emit(ex.table_csv(rows), args.out)
    if args.json:
        Path(args.json).write_text(
            _dumps({"summary": ex.table_summary(rows), "rows": [r.as_dict() for r in rows]}) + "\n"
        )
    s = ex.table_summary(rows)
    print(
        f"table {args.table}: {s['match']}/{s['rows']} within {args.tol}, "
        f"{s['rounding_consistent']} rounding-consistent, flagged rows {s['flagged']}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    P = _params(args)
    checks = [ex.oracle_crosscheck(P, regime="single", delta=args.delta_check, rho=args.rho, n=args.step)]
    if args.double:
        checks.append(ex.oracle_crosscheck(P, regime="double"))
    study = ex.smoothing_convergence_study(P, args.deltas, rho=args.rho, n=args.step, workers=args.workers)
    _emit(study.to_csv(), args.out)
    if args.json:
        Path(args.json).write_text(ex.summary_json(convergence=study, crosschecks=checks) + "\n")
    ok = all(c.ok for c in checks) and study.lambda_monotone and study.h_monotone
    ok = ok and all(r.map_ok for r in study.rows)
    ok = ok and all(r.abs_err_hstar <= r.displacement_bound for r in study.rows if r.delta > 0)
    for c in checks:
        for key, val in c.residuals.items():
            flag = "ok" if val <= c.thresholds[key] else "BREACH"
            print(f"{c.regime:6s} {key:26s} {val:.3e} <= {c.thresholds[key]:.0e} {flag}", file=sys.stderr)
    print(f"lambda monotone: {study.lambda_monotone}, h monotone: {study.h_monotone}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_RESIDUAL


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="relaydde", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="return-map coefficients, fixed points and shape reports")
    _add_params(p)
    p.add_argument("--regime", choices=("single", "double"), default="single")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="exact or smoothed trajectory as CSV")
    _add_params(p)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", default=True)
    mode.add_argument("--smoothed", action="store_true")
    p.add_argument("--regime", choices=("single", "double"), default="single")
    p.add_argument("--h", default="auto", help="initial value, or 'auto' for the analytic h*")
    p.add_argument("--negative-history", action="store_true", help="start from -|h| with negative history")
    p.add_argument("--periods", type=int, default=1)
    p.add_argument("--resolution", type=float, default=0.01)
    p.add_argument("--delta", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--step", type=int, default=1000, help="steps per unit time (smoothed)")
    p.add_argument("--no-shape-check", dest="check_shape", action="store_false")
    p.add_argument("--out")
    p.add_argument("--events", help="write the event log JSON here (exact mode)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("smooth", help="build and export a smoothing spec")
    _add_params(p)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--out")
    p.add_argument("--samples", help="CSV of f_tilde and a_tilde samples")
    p.set_defaults(func=cmd_smooth)

    p = sub.add_parser("sweep", help="reproduce a published table")
    p.add_argument("--table", type=int, choices=(1, 2), required=True)
    p.add_argument("--tol", type=float, default=ex.TOLERANCE)
    p.add_argument("--no-errata", action="store_true", help="use the printed decay rates verbatim")
    p.add_argument("--out")
    p.add_argument("--json")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="cross-checks and the smoothing convergence study")
    _add_params(p)
    p.add_argument("--deltas", type=_float_list, default=[1e-2, 1e-3, 1e-4])
    p.add_argument("--delta-check", type=float, default=1e-3, help="delta for the smoothed-vs-exact check")
    p.add_argument("--rho", type=float, default=1e-3)
    p.add_argument("--step", type=int, default=1000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--double", action="store_true", help="also run the double-period check")
    p.add_argument("--out")
    p.add_argument("--json")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (_Hypothesis, HypothesisFailed, ShapeFailed) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (DeltaTooLarge, WindowTooWide, NoAdmissibleMixing, GridMisaligned) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
