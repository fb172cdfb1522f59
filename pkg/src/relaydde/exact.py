"""Event-driven exact integration of the relay equation.

Between events the forcing a(t) f0(x(t-1)) is constant, so the solution is
x(t) = alpha + beta exp(-mu (t - t_start)) with alpha = forcing / mu.  Events
are coefficient switches (kT + p1, kT), zeros of x (located with a logarithm)
and the delayed sign switches one time unit after each zero.
"""

from __future__ import annotations

import bisect
import csv
import io
import json
import math
from collections import deque
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .maps import shape_conditions_single
from .params import Params

# events closer than this are processed together
MERGE_TOL = 1e-13


class EventKind(str, Enum):
    ZERO_CROSSING = "ZeroCrossing"
    COEFFICIENT_SWITCH = "CoefficientSwitch"
    DELAYED_SIGN_SWITCH = "DelayedSignSwitch"


class DegenerateSegment(RuntimeError):
    """The solution became identically zero (alpha = beta = 0)."""


class OutOfRange(ValueError):
    pass


class ShapeViolated(RuntimeError):
    def __init__(self, index, report):
        self.index = index
        self.report = report
        super().__init__(f"iterate {index} leaves the single-period regime: " + ", ".join(report.failed()))


@dataclass(frozen=True)
class Event:
    time: float
    kind: EventKind
    merged: bool = False
    note: str = ""

    def as_dict(self):
        return {"time": self.time, "kind": self.kind.value, "merged": self.merged, "note": self.note}


@dataclass(frozen=True)
class ExpSegment:
    t_start: float
    t_end: float
    alpha: float
    beta: float
    mu: float

    def value(self, t):
        return self.alpha + self.beta * np.exp(-self.mu * (t - self.t_start))

    @property
    def end_value(self) -> float:
        return self.alpha + self.beta * math.exp(-self.mu * (self.t_end - self.t_start))


def _make_segment(t0, t1, x0, forcing, mu) -> ExpSegment:
    alpha = forcing / mu
    beta = x0 - alpha
    if alpha == 0.0 and beta == 0.0:
        raise DegenerateSegment(f"identically zero solution from t={t0!r}")
    return ExpSegment(t0, t1, alpha, beta, mu)


@dataclass(frozen=True)
class Trajectory:
    params: Params
    h: float
    history_sign: int
    segments: tuple
    events: tuple

    @property
    def horizon(self) -> float:
        return self.segments[-1].t_end

    @property
    def zeros(self):
        return tuple(e.time for e in self.events if e.kind is EventKind.ZERO_CROSSING and e.note != "touch")

    def events_of(self, kind: EventKind):
        return tuple(e.time for e in self.events if e.kind is kind)

    def _index(self, t: float) -> int:
        if not (0.0 <= t <= self.horizon):
            raise OutOfRange(f"t={t!r} outside [0, {self.horizon!r}]")
        starts = [s.t_start for s in self.segments]
        return min(bisect.bisect_right(starts, t) - 1, len(self.segments) - 1)

    def eval(self, t):
        if np.ndim(t) == 0:
            return float(self.segments[self._index(float(t))].value(float(t)))
        t = np.asarray(t, dtype=float)
        if t.size and (t.min() < 0.0 or t.max() > self.horizon):
            raise OutOfRange(f"times outside [0, {self.horizon!r}]")
        starts = np.array([s.t_start for s in self.segments])
        idx = np.clip(np.searchsorted(starts, t, side="right") - 1, 0, len(self.segments) - 1)
        alpha = np.array([s.alpha for s in self.segments])[idx]
        beta = np.array([s.beta for s in self.segments])[idx]
        return alpha + beta * np.exp(-self.params.mu * (t - starts[idx]))

    __call__ = eval

    def join_mismatch(self) -> float:
        """Largest jump of x across consecutive segment joins."""
        worst = 0.0
        for a, b in zip(self.segments, self.segments[1:]):
            worst = max(worst, abs(a.end_value - (b.alpha + b.beta)))
        return worst

    def to_csv(self, resolution: float | None = None, n_samples: int | None = None) -> str:
        """Rows ``t,x,segment_index,event`` at uniform samples plus every event time."""
        if resolution is not None:
            n = max(1, int(math.ceil(self.horizon / resolution)))
        else:
            n = n_samples or 400
        rows = [(float(t), "") for t in np.linspace(0.0, self.horizon, n + 1)]
        rows += [(e.time, e.kind.value) for e in self.events if e.time <= self.horizon]
        rows.sort(key=lambda r: (r[0], r[1]))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "segment_index", "event"])
        for t, ev in rows:
            i = self._index(t)
            w.writerow([f"{t:.17g}", f"{float(self.segments[i].value(t)):.17g}", i, ev])
        return buf.getvalue()

    def events_json(self) -> str:
        payload = {
            "h": self.h,
            "history_sign": self.history_sign,
            "horizon": self.horizon,
            "events": [e.as_dict() for e in self.events],
        }
        return json.dumps(payload, indent=2)


def solve_exact(params: Params, h: float, t_end: float, history_sign: int | None = None) -> Trajectory:
    """Forward solution on [0, t_end] from a sign-definite history with x(0) = h.

    Only the sign of the history on [-1, 0) matters; it defaults to sign(h).
    """
    h = float(h)
    if history_sign is None:
        history_sign = 1 if h > 0 else -1
    if history_sign not in (-1, 1) or not (h * history_sign > 0) or not math.isfinite(h):
        raise ValueError("need h != 0 with the same sign as the history")
    if not t_end > 0:
        raise ValueError(f"t_end must be > 0 (got {t_end!r})")

    mu, T, p1 = params.mu, params.T, params.p1
    period, phase = 0, 0  # phase 0: a1 on [kT, kT+p1); phase 1: a2 on [kT+p1, (k+1)T)
    s_del = history_sign  # sign of x(t - 1)
    pending = deque()  # (time, sign) of delayed sign switches
    segments, events = [], []
    t, x = 0.0, h

    while t < t_end:
        a = params.a1 if phase == 0 else params.a2
        seg = _make_segment(t, t, x, -a * s_del, mu)
        t_sw = period * T + (p1 if phase == 0 else T)
        t_del = pending[0][0] if pending else math.inf
        t_zero = math.inf
        if seg.alpha * seg.beta < 0:
            tz = t + math.log(-seg.beta / seg.alpha) / mu
            if tz > t + MERGE_TOL:
                t_zero = tz
        tau = min(t_sw, t_del, t_zero, t_end)
        is_end = t_end <= tau + MERGE_TOL
        if is_end:
            tau = t_end
        is_zero = t_zero <= tau + MERGE_TOL
        is_sw = t_sw <= tau + MERGE_TOL
        is_del = t_del <= tau + MERGE_TOL

        seg = ExpSegment(t, tau, seg.alpha, seg.beta, mu)
        segments.append(seg)
        x_before = x
        x = 0.0 if is_zero else seg.end_value
        t = tau
        if is_end:
            break

        merged = (is_zero + is_sw + is_del) > 1
        note = "merged" if merged else ""
        if is_sw:
            if phase == 0:
                phase = 1
            else:
                phase, period = 0, period + 1
            events.append(Event(tau, EventKind.COEFFICIENT_SWITCH, merged, note))
        if is_del:
            while pending and pending[0][0] <= tau + MERGE_TOL:
                _, s_del = pending.popleft()
            events.append(Event(tau, EventKind.DELAYED_SIGN_SWITCH, merged, note))
        if is_zero:
            a = params.a1 if phase == 0 else params.a2
            after = 1 if -a * s_del > 0 else -1
            before = 1 if x_before > 0 else -1
            if after != before:
                pending.append((tau + 1.0, after))
                events.append(Event(tau, EventKind.ZERO_CROSSING, merged, note))
            else:
                # forcing flipped exactly at the zero: x touches 0 and turns back
                events.append(Event(tau, EventKind.ZERO_CROSSING, merged, "touch"))

    return Trajectory(params, h, history_sign, tuple(segments), tuple(events))


def simulated_period_value(params: Params, h: float, periods: int = 1) -> float:
    return solve_exact(params, h, periods * params.T).eval(periods * params.T)


def period_iterate(params: Params, h: float, n: int):
    """x(T), x(2T), ..., x(nT), restarting each period from the endpoint value."""
    out = []
    for i in range(n):
        report = shape_conditions_single(params, h)
        if not report.satisfied:
            raise ShapeViolated(i, report)
        h = solve_exact(params, h, params.T).eval(params.T)
        out.append(h)
    return out
