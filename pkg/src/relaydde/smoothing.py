"""Smooth replacements for the relay nonlinearity and the step coefficient.

f_tilde equals -sign(x) for |x| >= delta and is a C^2 polynomial inside the
window: -S(x/delta) + c (1 - (x/delta)^2)^3 with S the odd quintic smoothstep.
The mixing constant c is fixed by matching the weighted integral
J(alpha, f_tilde) = J(alpha, -sign) for the first zero crossing
(alpha = -a1/mu), which makes the smoothed and relay solutions agree again
right after the crossing.

a_tilde replaces the two coefficient jumps by C^2 transitions of width rho,
again matched through an exponentially weighted integral so that the
solution leaves each transition window with the unsmoothed value.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad

from .maps import fixed_point_single, single_coefficients, single_transit
from .params import Params, fold_time

# odd quintic smoothstep on [-1, 1]: S(+-1) = +-1, S' = S'' = 0 at +-1
SMOOTHSTEP = Polynomial([0.0, 15 / 8, 0.0, -10 / 8, 0.0, 3 / 8])
# even bump on [-1, 1], value 1 at 0, vanishing with two derivatives at +-1
BUMP = Polynomial([1.0, 0.0, -3.0, 0.0, 3.0, 0.0, -1.0])
# the same two shapes on [0, 1]
STEP01 = Polynomial([0.0, 0.0, 0.0, 10.0, -15.0, 6.0])
BUMP01 = Polynomial([0.0, 0.0, 0.0, 64.0, -192.0, 192.0, -64.0])

_GL_X, _GL_W = leggauss(64)


class DeltaTooLarge(ValueError):
    def __init__(self, msg, suggested_max=None):
        self.suggested_max = suggested_max
        if suggested_max is not None:
            msg += f" (largest admissible delta ~ {suggested_max:.6g})"
        super().__init__(msg)


class WindowTooWide(ValueError):
    pass


class NoAdmissibleMixing(RuntimeError):
    pass


def theta_pm(alpha: float, delta: float, mu: float):
    """Times (relative to a zero of alpha + beta e^{-mu t}) at which the solution equals +-delta."""
    if alpha == 0 or not delta < abs(alpha):
        raise DeltaTooLarge(f"need delta < |alpha| (delta={delta!r}, alpha={alpha!r})")
    theta_plus = -math.log1p(-delta / alpha) / mu
    theta_minus = -math.log1p(delta / alpha) / mu
    return theta_plus, theta_minus


@dataclass(frozen=True)
class Piecewise:
    """Piecewise polynomial on [-delta, delta] in the scaled variable v = u / delta.

    ``pieces`` holds (v0, v1, Polynomial) with -1 <= v0 < v1 <= 1.
    """

    pieces: tuple

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        out = np.zeros_like(v)
        for v0, v1, p in self.pieces:
            mask = (v >= v0) & (v <= v1)
            out = np.where(mask, p(v), out)
        return out

    def __sub__(self, other: "Piecewise") -> "Piecewise":
        cuts = sorted({c for v0, v1, _ in self.pieces + other.pieces for c in (v0, v1)})
        pieces = []
        for lo, hi in zip(cuts, cuts[1:]):
            mid = 0.5 * (lo + hi)
            pa = next(p for a, b, p in self.pieces if a <= mid <= b)
            pb = next(p for a, b, p in other.pieces if a <= mid <= b)
            pieces.append((lo, hi, pa - pb))
        return Piecewise(tuple(pieces))


NEG_SIGN = Piecewise(((-1.0, 0.0, Polynomial([1.0])), (0.0, 1.0, Polynomial([-1.0]))))


def _piece_integral(v0, v1, p: Polynomial, eps: float) -> float:
    """int_{v0}^{v1} p(v) / (1 - eps v)^2 dv."""
    coef = p.coef
    if len(coef) == 1:
        return coef[0] * (v1 - v0) / ((1.0 - eps * v1) * (1.0 - eps * v0))
    if abs(eps) <= 0.5:
        v = 0.5 * (v1 - v0) * _GL_X + 0.5 * (v1 + v0)
        return 0.5 * (v1 - v0) * float(np.dot(_GL_W, p(v) / (1.0 - eps * v) ** 2))
    val, _ = quad(lambda v: p(v) / (1.0 - eps * v) ** 2, v0, v1, epsabs=1e-15, epsrel=1e-12, limit=200)
    return val


def J(alpha: float, delta: float, mu: float, g) -> float:
    """(alpha - delta)/mu * int_{-delta}^{delta} g(u) / (alpha - u)^2 du.

    ``g`` may be a number (constant), a :class:`Piecewise` in v = u/delta
    (evaluated piece by piece without adaptive quadrature) or any callable of u
    (adaptive quadrature, split at 0).
    """
    if not abs(alpha) > delta:
        raise DeltaTooLarge(f"need |alpha| > delta (alpha={alpha!r}, delta={delta!r})")
    if isinstance(g, (int, float)):
        return 2.0 * g * delta / (mu * (alpha + delta))
    if isinstance(g, Piecewise):
        eps = delta / alpha
        total = sum(_piece_integral(v0, v1, p, eps) for v0, v1, p in g.pieces)
        return (alpha - delta) / mu * delta / alpha**2 * total
    f = lambda u: g(u) / (alpha - u) ** 2
    kw = dict(epsabs=1e-13, epsrel=1e-13, limit=200)
    val = quad(f, -delta, 0.0, **kw)[0] + quad(f, 0.0, delta, **kw)[0]
    return (alpha - delta) / mu * val


# --- f_tilde -----------------------------------------------------------------


@dataclass(frozen=True)
class FTilde:
    delta: float
    c: float

    @property
    def window_poly(self) -> Polynomial:
        return -SMOOTHSTEP + self.c * BUMP

    def as_piecewise(self) -> Piecewise:
        return Piecewise(((-1.0, 1.0, self.window_poly),))

    def __call__(self, x):
        scalar = np.ndim(x) == 0
        x = np.asarray(x, dtype=float)
        v = x / self.delta
        out = np.where(np.abs(v) >= 1.0, -np.sign(x), self.window_poly(np.clip(v, -1.0, 1.0)))
        return float(out) if scalar else out


def build_f_tilde(delta: float, alpha: float, mu: float) -> FTilde:
    """Solve for the bump weight so that J(alpha, f_tilde) = J(alpha, -sign)."""
    if not 0 < delta < abs(alpha):
        raise DeltaTooLarge(f"need 0 < delta < |alpha| (delta={delta!r}, alpha={alpha!r})")
    target = J(alpha, delta, mu, NEG_SIGN)
    base = J(alpha, delta, mu, Piecewise(((-1.0, 1.0, -SMOOTHSTEP),)))
    per_unit = J(alpha, delta, mu, Piecewise(((-1.0, 1.0, BUMP),)))
    # J is linear in g, so the residual is affine in c
    c = (target - base) / per_unit
    ft = FTilde(delta, c)
    v = np.linspace(-1.0, 1.0, 10_001)
    vals = ft.window_poly(v)
    if vals.min() < -1.0 or vals.max() > 1.0:
        raise NoAdmissibleMixing(
            f"mixing c={c!r} pushes f_tilde outside [-1, 1] (range {vals.min():.6g}..{vals.max():.6g})"
        )
    return ft


# --- a_tilde -----------------------------------------------------------------


def _weighted(fn, rho, mu, lo=0.0, hi=1.0):
    """int over u in [lo, hi] of fn(u) e^{-mu rho (1 - u)} rho du."""
    u = 0.5 * (hi - lo) * _GL_X + 0.5 * (hi + lo)
    return 0.5 * (hi - lo) * rho * float(np.dot(_GL_W, fn(u) * np.exp(-mu * rho * (1.0 - u))))


@dataclass(frozen=True)
class Transition:
    """C^2 profile on a window of width rho: a_start -> a_end plus a bump of weight c.

    The blend runs on the first ``lam`` fraction of the window only.
    """

    a_start: float
    a_end: float
    lam: float
    c: float

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        s = STEP01(np.clip(u / self.lam, 0.0, 1.0))
        return self.a_start + (self.a_end - self.a_start) * s + self.c * BUMP01(u)

    def weighted_integral(self, rho, mu) -> float:
        parts = [(0.0, self.lam), (self.lam, 1.0)] if self.lam < 1.0 else [(0.0, 1.0)]
        return sum(_weighted(self, rho, mu, lo, hi) for lo, hi in parts)


def _solve_transition(a_start, a_end, rho, mu, upper):
    if a_start == a_end:
        return Transition(a_start, a_end, 1.0, 0.0), 0.0
    plain = -math.expm1(-mu * rho) / mu  # int_0^rho e^{-mu (rho - s)} ds
    target = a_end * plain
    bump_w = _weighted(BUMP01, rho, mu)
    u = np.linspace(0.0, 1.0, 10_001)
    lam = 1.0
    while lam >= 2.0**-20:
        blend = Transition(a_start, a_end, lam, 0.0)
        c = (target - blend.weighted_integral(rho, mu)) / bump_w
        tr = Transition(a_start, a_end, lam, c)
        vals = tr(u)
        if vals.min() > 0.0 and vals.max() <= upper:
            return tr, tr.weighted_integral(rho, mu) - target
        lam *= 0.5
    raise NoAdmissibleMixing(f"no admissible transition {a_start!r} -> {a_end!r} on width {rho!r}")


@dataclass(frozen=True)
class ATilde:
    params: Params
    rho: float
    first: Transition  # on [0, rho], a2 -> a1
    second: Transition  # on [p1, p1 + rho], a1 -> a2

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        r = np.asarray(fold_time(self.params, t), dtype=float)
        p1, rho = self.params.p1, self.rho
        out = np.select(
            [r < rho, r < p1, r < p1 + rho],
            [self.first(r / rho), self.params.a1, self.second((r - p1) / rho)],
            self.params.a2,
        )
        return float(out) if scalar else out

    def windows(self, horizon: float):
        """Transition intervals intersecting [0, horizon]."""
        T, p1, rho = self.params.T, self.params.p1, self.rho
        out, k = [], 0
        while k * T <= horizon:
            out += [(k * T, k * T + rho), (k * T + p1, k * T + p1 + rho)]
            k += 1
        return [(a, b) for a, b in out if a < horizon]


def build_a_tilde(rho: float, params: Params):
    """Returns (ATilde, residuals) with the integral-matching residual of each window."""
    if not 0 < rho < min(params.p1, params.p2):
        raise WindowTooWide(f"need 0 < rho < min(p1, p2) (rho={rho!r})")
    upper = 2.0 * max(params.a1, params.a2)
    first, r1 = _solve_transition(params.a2, params.a1, rho, params.mu, upper)
    second, r2 = _solve_transition(params.a1, params.a2, rho, params.mu, upper)
    return ATilde(params, rho, first, second), (r1, r2)


# --- the assembled smoothing ------------------------------------------------


def eta_coefficients(delta: float, params: Params):
    """eta(h, delta) = eta0 + eta1 * h."""
    a1, mu, T = params.a1, params.mu, params.T
    if not mu * delta < a1:
        raise DeltaTooLarge(f"need mu*delta < a1 (delta={delta!r})")
    scale = math.exp(mu * (1.0 - T)) * (2.0 * math.exp(mu) - 1.0) / (a1 - mu * delta)
    return scale * a1, scale * mu


def eta(h: float, delta: float, params: Params) -> float:
    e0, e1 = eta_coefficients(delta, params)
    return e0 + e1 * h


@dataclass(frozen=True)
class SmoothingSpec:
    params: Params
    delta: float
    rho: float
    f_tilde: FTilde
    a_tilde: ATilde
    R_delta: float
    thetas: tuple  # (theta+, theta-, vartheta+, vartheta-)
    h_star: float
    residuals: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    @property
    def mixing(self) -> float:
        return self.f_tilde.c

    @property
    def bound_constant(self) -> float:
        """C with |R(delta)| <= C delta, from the (vartheta+ - vartheta-) 2 a2 estimate."""
        return 2.0 * self.params.a2 * (self.thetas[2] - self.thetas[3]) / self.delta

    def exceptional_intervals(self, h: float):
        tr = single_transit(self.params, h)
        tp, tm, vp, vm = self.thetas
        p1 = self.params.p1
        return [
            (0.0, self.rho),
            (p1, p1 + self.rho),
            (tr.t1 + 1.0 + tp, tr.t1 + 1.0 + tm),
            (tr.t2 + 1.0 + vm, tr.t2 + 1.0 + vp),
        ]

    def as_dict(self) -> dict:
        tp, tm, vp, vm = self.thetas
        return {
            "params": self.params.as_dict(),
            "delta": self.delta,
            "rho": self.rho,
            "mixing": {
                "f_tilde_c": self.f_tilde.c,
                "a_tilde_first": {"lam": self.a_tilde.first.lam, "c": self.a_tilde.first.c},
                "a_tilde_second": {"lam": self.a_tilde.second.lam, "c": self.a_tilde.second.c},
            },
            "R_delta": self.R_delta,
            "bound_constant": self.bound_constant,
            "thetas": {"theta_plus": tp, "theta_minus": tm, "vartheta_plus": vp, "vartheta_minus": vm},
            "h_star": self.h_star,
            "residuals": dict(self.residuals),
            "diagnostics": dict(self.diagnostics),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)

    def samples_csv(self, n: int = 2001) -> str:
        """f_tilde on [-2 delta, 2 delta] and a_tilde over one period, for plotting."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["series", "arg", "value"])
        for x in np.linspace(-2 * self.delta, 2 * self.delta, n):
            w.writerow(["f_tilde", f"{x:.17g}", f"{self.f_tilde(x):.17g}"])
        for t in np.linspace(0.0, self.params.T, n):
            w.writerow(["a_tilde", f"{t:.17g}", f"{self.a_tilde(t):.17g}"])
        return buf.getvalue()


def _delta_ok(params: Params, delta: float, h_star: float) -> list:
    """Names of the admissibility requirements on delta that fail."""
    a1, mu = params.a1, params.mu
    tr = single_transit(params, h_star)
    bad = []
    if not delta < (a1 / mu) * (1.0 - 1e-6):
        return ["delta < a1/mu"]
    tp, tm = theta_pm(-a1 / mu, delta, mu)
    vp, vm = theta_pm(a1 / mu, delta, mu)
    if not delta + 2.0 * a1 * (tm - tp) < abs(tr.x1):
        bad.append("x1 + C1 delta < -delta")
    if not delta < 0.5 * h_star:
        bad.append("delta < h*/2")
    if not (tr.t2 + vp < params.p1 < tr.t2 + 1.0 + vm):
        bad.append("t2 + vartheta+ < p1 < t2 + 1 + vartheta-")
    if not tr.t1 + 1.0 + tm < tr.t2 + vm:
        bad.append("windows separated")
    return bad


def max_admissible_delta(params: Params, h_star: float) -> float:
    lo, hi = 0.0, params.a1 / params.mu
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _delta_ok(params, mid, h_star):
            hi = mid
        else:
            lo = mid
    return lo


def R_delta(spec_or_ft, params: Params) -> float:
    """a2 * J(a1/mu, f_tilde - f); independent of h."""
    ft = spec_or_ft.f_tilde if isinstance(spec_or_ft, SmoothingSpec) else spec_or_ft
    return params.a2 * J(params.a1 / params.mu, ft.delta, params.mu, ft.as_piecewise() - NEG_SIGN)


def build_smoothing(params: Params, delta: float, rho: float) -> SmoothingSpec:
    """Construct f_tilde, a_tilde and derived quantities around the single-period orbit."""
    fp = fixed_point_single(params)
    h_star = fp.h_star
    if not delta > 0:
        raise DeltaTooLarge(f"delta must be > 0 (got {delta!r})")
    bad = _delta_ok(params, delta, h_star)
    if bad:
        raise DeltaTooLarge("delta fails: " + ", ".join(bad), max_admissible_delta(params, h_star))

    tr = single_transit(params, h_star)
    rho_max = 0.9 * min(tr.t1, tr.t2 + 1.0 - params.p1)
    if not 0 < rho <= rho_max:
        raise WindowTooWide(f"need 0 < rho <= {rho_max:.6g} (rho={rho!r})")
    # the second transition reads x(s - 1) on [p1 - 1, p1 - 1 + rho]; it must stay clear of the window
    from .exact import solve_exact

    traj = solve_exact(params, h_star, params.p1)
    ends = traj.eval(np.array([params.p1 - 1.0, params.p1 - 1.0 + rho]))
    if not (np.all(ends < -delta)):
        raise WindowTooWide(
            f"x(s-1) enters [-delta, delta] on the second transition window (values {ends.tolist()})"
        )

    mu, a1 = params.mu, params.a1
    ft = build_f_tilde(delta, -a1 / mu, mu)
    at, (r1, r2) = build_a_tilde(rho, params)
    tp, tm = theta_pm(-a1 / mu, delta, mu)
    vp, vm = theta_pm(a1 / mu, delta, mu)
    residual_f = J(-a1 / mu, delta, mu, ft.as_piecewise()) - J(-a1 / mu, delta, mu, NEG_SIGN)
    R = R_delta(ft, params)
    m, b = single_coefficients(params)
    return SmoothingSpec(
        params=params,
        delta=float(delta),
        rho=float(rho),
        f_tilde=ft,
        a_tilde=at,
        R_delta=R,
        thetas=(tp, tm, vp, vm),
        h_star=h_star,
        residuals={"f_tilde_J": residual_f, "a_tilde_first": r1, "a_tilde_second": r2},
        diagnostics={
            "max_admissible_delta": max_admissible_delta(params, h_star),
            "max_admissible_rho": rho_max,
            "m": m,
            "b": b,
            "t1": tr.t1,
            "t2": tr.t2,
            "x1": tr.x1,
        },
    )


def f_tilde_map_predict(h: float, spec: SmoothingSpec, params: Params | None = None) -> float:
    """Predicted smoothed return map F(h) + eta(h, delta) R(delta)."""
    params = params or spec.params
    m, b = single_coefficients(params)
    return m * h + b + eta(h, spec.delta, params) * spec.R_delta


def predicted_fixed_point(spec: SmoothingSpec):
    """(h_tilde, slope) of the affine predicted map."""
    m, b = single_coefficients(spec.params)
    e0, e1 = eta_coefficients(spec.delta, spec.params)
    slope = m + e1 * spec.R_delta
    return (b + e0 * spec.R_delta) / (1.0 - slope), slope
