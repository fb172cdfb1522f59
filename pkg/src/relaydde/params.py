"""Equation constants, the periodic step coefficient and the relay nonlinearity.

The equation is x'(t) = -mu x(t) + a(t) f(x(t-1)) with
a(t) = a1 on [0, p1), a2 on [p1, p1+p2), extended periodically, and
f(x) = -sign(x).
"""

from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

PARAM_NAMES = ("a1", "a2", "p1", "p2", "mu")


class NonPositiveParameter(ValueError):
    """One or more equation constants violate positivity.

    ``violations`` lists every offending (name, value) pair.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        msg = "; ".join(f"{name} must be > 0 (got {value!r})" for name, value in self.violations)
        super().__init__(msg)


class ZeroDecayRate(NonPositiveParameter):
    """mu == 0 is rejected: all closed forms divide by mu."""


@dataclass(frozen=True)
class Params:
    a1: float
    a2: float
    p1: float
    p2: float
    mu: float

    def __post_init__(self):
        for name in PARAM_NAMES:
            object.__setattr__(self, name, float(getattr(self, name)))
        bad = []
        for name in PARAM_NAMES:
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                bad.append((name, v))
        if bad:
            if any(name == "mu" and v == 0 for name, v in bad):
                raise ZeroDecayRate(bad)
            raise NonPositiveParameter(bad)

    @property
    def T(self) -> float:
        return self.p1 + self.p2

    def as_dict(self) -> dict:
        d = asdict(self)
        d["T"] = self.T
        return d


def validate_params(a1, a2, p1, p2, mu) -> Params:
    return Params(a1, a2, p1, p2, mu)


def fold_time(params: Params, t):
    """Reduce t into [0, T). Negative times are shifted by a whole number of periods first."""
    T = params.T
    if np.ndim(t) == 0:
        t = float(t)
        if t < 0:
            t += math.ceil(-t / T) * T
        r = math.fmod(t, T)
        return 0.0 if r >= T else r
    t = np.asarray(t, dtype=float)
    shift = np.where(t < 0, np.ceil(-t / T) * T, 0.0)
    r = np.fmod(t + shift, T)
    return np.where(r >= T, 0.0, r)


def coefficient_at(params: Params, t):
    """The T-periodic step coefficient; right-continuous at the switch instants."""
    r = fold_time(params, t)
    if np.ndim(r) == 0:
        return params.a1 if r < params.p1 else params.a2
    return np.where(r < params.p1, params.a1, params.a2)


def relay(x):
    """f0(x) = -sign(x), with f0(0) = 0."""
    if np.ndim(x) == 0:
        x = float(x)
        return -1.0 if x > 0 else (1.0 if x < 0 else 0.0)
    return -np.sign(np.asarray(x, dtype=float))


_LINE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.+?)\s*$")


def read_config(path) -> dict:
    """Parse a plain-text ``key = value`` file. Blank lines and ``#`` comments are skipped."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if m is None:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        out[m.group(1)] = m.group(2)
    return out


def params_from_mapping(mapping) -> Params:
    missing = [k for k in PARAM_NAMES if k not in mapping]
    if missing:
        raise ValueError("missing parameter(s): " + ", ".join(missing))
    return Params(*(float(mapping[k]) for k in PARAM_NAMES))


# named parameter sets used throughout the tests and CLI
PRESETS = {
    "p1": Params(2.0, 0.1, 3.0, 1.0, 0.1),
    "p2": Params(4.0, 2.0, 0.5, 1.0, 0.1),
}
