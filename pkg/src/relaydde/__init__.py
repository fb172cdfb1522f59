"""Relay delay equation with a periodic step coefficient: exact solver, return maps, smoothing."""

from .exact import Trajectory, period_iterate, solve_exact
from .maps import (
    AffineMap,
    FixedPointResult,
    double_coefficients,
    double_map,
    double_transit,
    fixed_point_double,
    fixed_point_single,
    phi2,
    composite_double,
    shape_conditions_double,
    shape_conditions_single,
    single_coefficients,
    single_map,
    single_transit,
)
from .params import PRESETS, Params, coefficient_at, relay, validate_params
from .smoothing import SmoothingSpec, build_smoothing

__version__ = "0.1.0"
