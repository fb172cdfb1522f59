"""Method-of-steps RK4 for the smoothed equation x' = -mu x + a_tilde(t) f_tilde(x(t-1)).

The base grid has spacing 1/N with N chosen so that the delay, p1, p2 and rho
are all whole multiples of the step. On each unit interval [k, k+1] the
forcing g(t) = a_tilde(t) f_tilde(x(t-1)) is fully determined by the previous
interval, so it is evaluated in one vectorised pass (delayed values between
nodes come from cubic Hermite interpolation on the stored nodes). What is left
is a linear recurrence x_{j+1} = R(z_j) x_j + c_j, run with compensated
summation.

Steps on which the forcing changes quickly (the a_tilde transitions and the
instants where x(t-1) passes through [-delta, delta]) are split into substeps.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .maps import single_coefficients
from .params import Params
from .smoothing import SmoothingSpec, predicted_fixed_point

MAX_GRID = 1_000_000
# substeps per characteristic width of a fast forcing change, for refine="auto"
AUTO_RESOLUTION = 200
MAX_SUBSTEPS = 200_000


class GridMisaligned(ValueError):
    pass


class NonFiniteState(FloatingPointError):
    pass


class NoConvergence(RuntimeError):
    def __init__(self, msg, trace):
        self.trace = list(trace)
        super().__init__(msg)


def aligned_grid(params: Params, rho: float, n: int) -> int:
    """Smallest multiple of the common grid of (1, p1, p2, rho) that is >= n."""
    if n < 1:
        raise GridMisaligned(f"need n >= 1 (got {n})")
    base = 1
    for v in (params.p1, params.p2, rho):
        fr = Fraction(v).limit_denominator(MAX_GRID)
        if abs(float(fr) - v) > 1e-12 * max(1.0, abs(v)):
            raise GridMisaligned(f"{v!r} is not representable on a grid with N <= {MAX_GRID}")
        base = math.lcm(base, fr.denominator)
    out = base * max(1, -(-n // base))
    if out > MAX_GRID:
        raise GridMisaligned(f"aligned grid needs N = {out} > {MAX_GRID}")
    return out


def _hermite(t, x, dx, q):
    """Cubic Hermite interpolation of stored nodes at query times q."""
    i = np.clip(np.searchsorted(t, q, side="right") - 1, 0, len(t) - 2)
    h = t[i + 1] - t[i]
    s = (q - t[i]) / h
    s2, s3 = s * s, s * s * s
    h00 = 2 * s3 - 3 * s2 + 1
    h10 = s3 - 2 * s2 + s
    h01 = -2 * s3 + 3 * s2
    h11 = s3 - s2
    return h00 * x[i] + h10 * h * dx[i] + h01 * x[i + 1] + h11 * h * dx[i + 1]


def _rk4_parts(mu, w, g0, gm, g1):
    """RK4 for x' = -mu x + g over a step of width w: returns (R - 1, c) with x_new = x + (R-1) x + c."""
    z = -mu * w
    r_minus_1 = z * (1 + z * (1 / 2 + z * (1 / 6 + z / 24)))
    # stages with x = 0
    k1 = g0
    k2 = gm + 0.5 * z * k1
    k3 = gm + 0.5 * z * k2
    k4 = g1 + z * k3
    c = w / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return r_minus_1, c


@dataclass(frozen=True)
class SampledTrajectory:
    step: float  # base grid spacing 1/N
    t: np.ndarray  # all stored nodes (base grid plus substeps)
    x: np.ndarray
    dx: np.ndarray
    horizon: float
    substeps: int = 0  # number of extra nodes from refinement

    @property
    def nodes(self):
        return list(zip(self.t.tolist(), self.x.tolist(), self.dx.tolist()))

    def __call__(self, q):
        scalar = np.ndim(q) == 0
        q = np.asarray(q, dtype=float)
        out = _hermite(self.t, self.x, self.dx, q)
        return float(out) if scalar else out

    def value_at_end(self) -> float:
        return float(self.x[-1])

    def to_csv(self, stride: int = 1) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x"])
        idx = list(range(0, len(self.t), stride))
        if idx[-1] != len(self.t) - 1:
            idx.append(len(self.t) - 1)
        for i in idx:
            w.writerow([f"{self.t[i]:.17g}", f"{self.x[i]:.17g}"])
        return buf.getvalue()


def integrate_smoothed(
    params: Params,
    spec: SmoothingSpec,
    h: float,
    horizon: float,
    n: int = 1000,
    refine="auto",
) -> SampledTrajectory:
    """Integrate from the constant history x = h on [-1, 0].

    ``n`` is the requested number of steps per unit time; the grid actually
    used is the next aligned one (see :func:`aligned_grid`). ``refine`` is
    "auto", an integer number of substeps for every flagged step, or 1 to
    switch refinement off.
    """
    N = aligned_grid(params, spec.rho, n)
    H = 1.0 / N
    total = horizon * N
    if abs(total - round(total)) > 1e-9 * max(1.0, total):
        raise GridMisaligned(f"horizon {horizon!r} is not a multiple of the step 1/{N}")
    total = int(round(total))
    if total < 1:
        raise GridMisaligned("horizon shorter than one step")

    mu, delta, rho = params.mu, spec.delta, spec.rho
    ft, at = spec.f_tilde, spec.a_tilde
    windows = np.array(at.windows(horizon + H)) if horizon > 0 else np.zeros((0, 2))
    lam_min = min(at.first.lam, at.second.lam)

    t_prev = np.array([-1.0, 0.0])
    x_prev = np.array([h, h], dtype=float)
    dx_prev = np.zeros(2)

    ts, xs, dxs = [np.array([0.0])], [], []
    x_cur, comp = float(h), 0.0
    n_sub = 0
    done = 0
    k = 0
    while done < total:
        steps = min(N, total - done)
        i = np.arange(steps)
        left = k + i * H
        right = k + (i + 1) * H
        right[-1] = k + steps * H

        # flag steps touched by an a_tilde transition
        flag_a = np.zeros(steps, dtype=bool)
        for a, b in windows:
            flag_a |= (left < b - 1e-12) & (right > a + 1e-12)
        # flag steps where the delayed argument may sit in [-delta, delta]
        if k == 0:
            flag_f = np.zeros(steps, dtype=bool)
            speed = np.zeros(steps)
        else:
            xa = _hermite(t_prev, x_prev, dx_prev, left - 1.0)
            xb = _hermite(t_prev, x_prev, dx_prev, right - 1.0)
            speed = np.interp(left - 1.0, t_prev, np.abs(dx_prev))
            reach = 2.0 * H * float(np.abs(dx_prev).max())
            flag_f = (np.minimum(np.abs(xa), np.abs(xb)) < delta + reach) | (np.sign(xa) != np.sign(xb))
            flag_f[1:] |= flag_f[:-1].copy()
            flag_f[:-1] |= flag_f[1:].copy()

        if refine == "auto":
            m_a = math.ceil(H / (lam_min * rho / AUTO_RESOLUTION))
            m_f = np.ceil(H * speed / (2.0 * delta / AUTO_RESOLUTION)).astype(int)
            m = np.ones(steps, dtype=int)
            m = np.where(flag_a, np.maximum(m, m_a), m)
            m = np.where(flag_f, np.maximum(m, np.maximum(m_f, 1)), m)
            m = np.minimum(m, MAX_SUBSTEPS)
        else:
            m = np.where(flag_a | flag_f, int(refine), 1)

        # substep start points and widths
        reps = np.repeat(np.arange(steps), m)
        offs = np.arange(reps.size) - np.repeat(np.cumsum(m) - m, m)
        width = (right - left)[reps] / m[reps]
        start = left[reps] + offs * width
        # consecutive substeps share node times so the widths telescope exactly
        end = np.empty_like(start)
        end[:-1] = start[1:]
        end[-1] = right[-1]

        width = end - start
        q = np.concatenate([start, start + 0.5 * width, end])
        if k == 0:
            fd = np.full(q.size, ft(h))
        else:
            fd = ft(_hermite(t_prev, x_prev, dx_prev, q - 1.0))
        g = at(q) * fd
        ns = start.size
        g0, gm, g1 = g[:ns], g[ns : 2 * ns], g[2 * ns :]
        rm1, c = _rk4_parts(mu, width, g0, gm, g1)

        x_start = x_cur
        xv = np.empty(ns)
        for j in range(ns):
            inc = rm1[j] * x_cur + c[j] - comp
            s = x_cur + inc
            comp = (s - x_cur) - inc
            x_cur = s
            xv[j] = s
        if not np.all(np.isfinite(xv)):
            raise NonFiniteState(f"non-finite state on [{k}, {k + 1}]")

        if k == 0:
            xs.append(np.array([h]))
            dxs.append(np.array([-mu * h + g0[0]]))
        ts.append(end)
        xs.append(xv)
        dxs.append(-mu * xv + g1)
        n_sub += ns - steps

        t_prev = np.concatenate([[start[0]], end])
        x_prev = np.concatenate([[x_start], xv])
        dx_prev = np.concatenate([[-mu * x_start + g0[0]], dxs[-1]])
        done += steps
        k += 1

    return SampledTrajectory(
        step=H,
        t=np.concatenate(ts),
        x=np.concatenate(xs),
        dx=np.concatenate(dxs),
        horizon=float(total * H),
        substeps=int(n_sub),
    )


@dataclass(frozen=True)
class PeriodMapProbe:
    h: float
    xT: float
    lambda_estimate: float | None = None


def period_map(params: Params, spec: SmoothingSpec, h: float, n: int = 1000, refine="auto") -> PeriodMapProbe:
    traj = integrate_smoothed(params, spec, h, params.T, n, refine)
    return PeriodMapProbe(float(h), traj.value_at_end())


def estimate_lambda(
    params: Params, spec: SmoothingSpec, h_center: float, n: int = 1000, eps: float | None = None, refine="auto"
) -> float:
    """Central difference of the period map; eps defaults to 1e-6 max(1, |h|)."""
    if eps is None:
        eps = 1e-6 * max(1.0, abs(h_center))
    hi = period_map(params, spec, h_center + eps, n, refine).xT
    lo = period_map(params, spec, h_center - eps, n, refine).xT
    return (hi - lo) / (2.0 * eps)


@dataclass(frozen=True)
class FixedPointSolve:
    h: float
    iterations: int
    method: str
    trace: tuple = field(default=(), repr=False)


def find_fixed_point_numeric(
    params: Params,
    spec: SmoothingSpec,
    n: int = 1000,
    tol: float = 1e-10,
    max_iter: int = 200,
    method: str = "auto",
    refine="auto",
) -> FixedPointSolve:
    """Root of P(h) - h starting from the analytic h*.

    "picard" iterates h <- P(h); "secant" uses secant steps on P(h) - h, which
    lands on the root of an affine map in one step. "auto" picks secant, as
    the period map is affine near h*.
    """
    m, _ = single_coefficients(params)
    if method == "auto":
        method = "secant"
    if method == "picard" and abs(m) >= 1.0:
        method = "secant"
    P = lambda h: period_map(params, spec, h, n, refine).xT
    h = spec.h_star
    trace = []
    if method == "picard":
        for it in range(1, max_iter + 1):
            h_new = P(h)
            trace.append((h, h_new))
            if abs(h_new - h) <= tol:
                return FixedPointSolve(h_new, it, method, tuple(trace))
            h = h_new
        raise NoConvergence(f"no convergence in {max_iter} iterations", trace)

    h0, h1 = h, h + 0.05 * max(1.0, abs(h))
    r0, r1 = P(h0) - h0, P(h1) - h1
    trace += [(h0, r0), (h1, r1)]
    for it in range(1, max_iter + 1):
        if r1 == r0:
            break
        h2 = h1 - r1 * (h1 - h0) / (r1 - r0)
        r2 = P(h2) - h2
        trace.append((h2, r2))
        if abs(h2 - h1) <= tol or r2 == 0.0:
            return FixedPointSolve(h2, it, method, tuple(trace))
        h0, r0, h1, r1 = h1, r1, h2, r2
    raise NoConvergence(f"secant stalled after {len(trace)} evaluations", trace)


def predicted_vs_numeric(params: Params, spec: SmoothingSpec, hs, n: int = 1000):
    """[(h, predicted F_tilde(h), probed x(T))]."""
    from .smoothing import f_tilde_map_predict

    return [(h, f_tilde_map_predict(h, spec, params), period_map(params, spec, h, n).xT) for h in hs]


__all__ = [
    "GridMisaligned",
    "NonFiniteState",
    "NoConvergence",
    "SampledTrajectory",
    "PeriodMapProbe",
    "FixedPointSolve",
    "aligned_grid",
    "integrate_smoothed",
    "period_map",
    "estimate_lambda",
    "find_fixed_point_numeric",
    "predicted_fixed_point",
    "predicted_vs_numeric",
]
