"""Closed-form return maps for the single-period and double-period regimes.

For a solution started from a positive constant history with x(0) = h, the
value one coefficient period later is affine in h:

* single period (two zeros inside [0, p1]):  x(T) = F(h) = m h + b
* double period (one zero inside [0, p1]):   x(T) = Phi1(h) = k h + d

Shape conditions decide whether the transit picture the formulas assume is
actually realised for a given h.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .params import Params


class MapKind(str, Enum):
    SINGLE_F = "SingleF"
    DOUBLE_PHI1 = "DoublePhi1"


class Regime(str, Enum):
    SINGLE = "SinglePeriod"
    DOUBLE = "DoublePeriod"


@dataclass(frozen=True)
class AffineMap:
    slope: float
    intercept: float
    kind: MapKind

    def __call__(self, h):
        return self.slope * h + self.intercept

    apply = __call__


@dataclass(frozen=True)
class SingleTransit:
    t1: float
    t2: float
    x1: float  # x(t1 + 1)
    x2: float  # x(p1)
    x3: float  # x(t2 + 1)
    x4: float  # x(T)


@dataclass(frozen=True)
class DoubleTransit:
    t1: float
    x1: float  # x(p1)
    x2: float  # x(t1 + 1)
    x3: float  # x(T)


@dataclass(frozen=True)
class Condition:
    name: str
    left: float
    right: float
    holds: bool


@dataclass(frozen=True)
class ShapeReport:
    kind: Regime
    h: float
    details: tuple

    @property
    def satisfied(self) -> bool:
        return all(c.holds for c in self.details)

    def failed(self):
        return [c.name for c in self.details if not c.holds]

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "h": self.h,
            "satisfied": self.satisfied,
            "details": [
                {"condition": c.name, "left": c.left, "right": c.right, "holds": c.holds}
                for c in self.details
            ],
        }


class HypothesisFailed(ValueError):
    def __init__(self, failed):
        self.failed = list(failed)
        super().__init__("hypotheses violated: " + ", ".join(self.failed))


class ShapeFailed(ValueError):
    def __init__(self, report: ShapeReport):
        self.report = report
        super().__init__(
            f"{report.kind.value} shape conditions fail at h={report.h!r}: " + ", ".join(report.failed())
        )


def _require_positive_h(h):
    if not h > 0:
        raise ValueError(f"h must be > 0 (got {h!r})")


# --- single period ---------------------------------------------------------


def single_coefficients(params: Params):
    a1, a2, mu, T = params.a1, params.a2, params.mu, params.T
    e = math.exp(-mu)
    common = (2.0 - e) * math.exp(-mu * (T - 2.0))
    m = (2.0 * a2 / a1 - e) * common
    b = (2.0 * a2 - a1 * e) / mu * common + (a1 - a2) / mu * math.exp(-mu * params.p2) - a2 / mu
    return m, b


def single_map(params: Params) -> AffineMap:
    m, b = single_coefficients(params)
    return AffineMap(m, b, MapKind.SINGLE_F)


def single_transit(params: Params, h: float) -> SingleTransit:
    _require_positive_h(h)
    a1, a2, p1, mu, T = params.a1, params.a2, params.p1, params.mu, params.T
    t1 = math.log1p(h * mu / a1) / mu
    x1 = -(a1 / mu) * (-math.expm1(-mu))
    t2 = t1 + 1.0 + math.log((a1 - mu * x1) / a1) / mu
    x2 = a1 / mu + (x1 - a1 / mu) * math.exp(-mu * (p1 - t1 - 1.0))
    x3 = a2 / mu + (x2 - a2 / mu) * math.exp(-mu * (t2 + 1.0 - p1))
    x4 = -a2 / mu + (x3 + a2 / mu) * math.exp(-mu * (T - t2 - 1.0))
    return SingleTransit(t1, t2, x1, x2, x3, x4)


def shape_conditions_single(params: Params, h: float) -> ShapeReport:
    tr = single_transit(params, h)
    p1, T = params.p1, params.T
    rows = (
        Condition("t1 > 0", tr.t1, 0.0, tr.t1 > 0),
        Condition("t1 + 1 < t2", tr.t1 + 1.0, tr.t2, tr.t1 + 1.0 < tr.t2),
        Condition("t2 < p1", tr.t2, p1, tr.t2 < p1),
        Condition("p1 - t2 < 1", p1 - tr.t2, 1.0, p1 - tr.t2 < 1.0),
        Condition("t2 + 1 < T", tr.t2 + 1.0, T, tr.t2 + 1.0 < T),
        Condition("x4 > 0", tr.x4, 0.0, tr.x4 > 0),
    )
    return ShapeReport(Regime.SINGLE, float(h), rows)


# --- double period ---------------------------------------------------------


def double_coefficients(params: Params):
    a1, a2, mu, T = params.a1, params.a2, params.mu, params.T
    k = (1.0 - 2.0 * a2 / a1 * math.exp(mu)) * math.exp(-mu * T)
    d = (
        (a2 - a1) / mu * math.exp(-mu * params.p2)
        + a1 / mu * math.exp(-mu * T)
        + a2 / mu * (1.0 - 2.0 * math.exp(-mu * (T - 1.0)))
    )
    return k, d


def double_map(params: Params) -> AffineMap:
    k, d = double_coefficients(params)
    return AffineMap(k, d, MapKind.DOUBLE_PHI1)


def double_transit(params: Params, h: float) -> DoubleTransit:
    _require_positive_h(h)
    a1, a2, p1, mu, T = params.a1, params.a2, params.p1, params.mu, params.T
    t1 = math.log1p(h * mu / a1) / mu
    x1 = -a1 / mu + (h + a1 / mu) * math.exp(-mu * p1)
    x2 = -a2 / mu + (x1 + a2 / mu) * math.exp(-mu * (t1 + 1.0 - p1))
    x3 = a2 / mu + (x2 - a2 / mu) * math.exp(-mu * (T - t1 - 1.0))
    return DoubleTransit(t1, x1, x2, x3)


def shape_conditions_double(params: Params, h: float) -> ShapeReport:
    tr = double_transit(params, h)
    p1, T = params.p1, params.T
    rows = (
        Condition("t1 < p1", tr.t1, p1, tr.t1 < p1),
        Condition("p1 < t1 + 1", p1, tr.t1 + 1.0, p1 < tr.t1 + 1.0),
        Condition("t1 + 1 < T", tr.t1 + 1.0, T, tr.t1 + 1.0 < T),
        Condition("T - p1 >= 1", T - p1, 1.0, T - p1 >= 1.0),
        Condition("x2 < 0", tr.x2, 0.0, tr.x2 < 0),
        Condition("x3 < 0", tr.x3, 0.0, tr.x3 < 0),
    )
    return ShapeReport(Regime.DOUBLE, float(h), rows)


def phi2(params: Params, h: float) -> float:
    """Return map for negative starts, Phi2(h) = -Phi1(-h)."""
    if not h < 0:
        raise ValueError(f"phi2 needs h < 0 (got {h!r})")
    k, d = double_coefficients(params)
    return -(k * (-h) + d)


def composite_double(params: Params, h: float) -> float:
    """Phi2 o Phi1 = k^2 h + k d - d."""
    k, d = double_coefficients(params)
    return k * k * h + k * d - d


# --- fixed points ----------------------------------------------------------


@dataclass(frozen=True)
class FixedPointResult:
    kind: Regime
    h_star: float
    multiplier: float
    shape: ShapeReport = field(repr=False)

    @property
    def stable(self) -> bool:
        return abs(self.multiplier) < 1.0

    @property
    def classification(self) -> str:
        a = abs(self.multiplier)
        return "stable" if a < 1.0 else ("marginal" if a == 1.0 else "unstable")

    @property
    def shape_ok(self) -> bool:
        return self.shape.satisfied

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "h_star": self.h_star,
            "multiplier": self.multiplier,
            "stable": self.stable,
            "classification": self.classification,
            "shape": self.shape.as_dict(),
        }


def fixed_point_single(params: Params, require_shape: bool = True) -> FixedPointResult:
    m, b = single_coefficients(params)
    failed = []
    if not abs(m) < 1.0:
        failed.append("|m| < 1")
    if not b > 0:
        failed.append("b > 0")
    if failed:
        raise HypothesisFailed(failed)
    h = b / (1.0 - m)
    report = shape_conditions_single(params, h)
    if require_shape and not report.satisfied:
        raise ShapeFailed(report)
    return FixedPointResult(Regime.SINGLE, h, m, report)


def fixed_point_double(params: Params, require_shape: bool = True) -> FixedPointResult:
    k, d = double_coefficients(params)
    failed = []
    if not abs(k) < 1.0:
        failed.append("|k| < 1")
    if not d < 0:
        failed.append("d < 0")
    if failed:
        raise HypothesisFailed(failed)
    # Phi1(h) + h = 0 with Phi1(h) = k h + d gives the denominator 1 + k
    h = -d / (1.0 + k)
    report = shape_conditions_double(params, h)
    if require_shape and not report.satisfied:
        raise ShapeFailed(report)
    return FixedPointResult(Regime.DOUBLE, h, k * k, report)
