import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from relaydde.exact import solve_exact
from relaydde.maps import (
    HypothesisFailed,
    MapKind,
    ShapeFailed,
    composite_double,
    double_coefficients,
    double_map,
    double_transit,
    fixed_point_double,
    fixed_point_single,
    phi2,
    shape_conditions_double,
    shape_conditions_single,
    single_coefficients,
    single_map,
    single_transit,
)
from relaydde.params import Params

from conftest import random_double, random_single


def test_p1_coefficients(p1):
    m, b = single_coefficients(p1)
    assert m == pytest.approx(-0.72165, abs=5e-6)
    assert b == pytest.approx(1.75887, abs=5e-5)
    assert round(abs(m), 2) == 0.72 and round(b, 2) == 1.76


def test_row3_coefficients():
    m, b = single_coefficients(Params(3, 1, 3, 1, 0.1))
    assert round(abs(m), 2) == 0.21 and round(b, 2) == 1.69


def test_m_vanishes():
    mu, a1 = 0.3, 2.0
    m, _ = single_coefficients(Params(a1, a1 * math.exp(-mu) / 2, 3, 1, mu))
    assert abs(m) < 1e-15


def test_p2_coefficients(p2):
    k, d = double_coefficients(p2)
    assert k == pytest.approx(-0.09052, abs=5e-6)
    assert d == pytest.approx(-1.71760, abs=1e-5)


def test_double_row18():
    k, d = double_coefficients(Params(6, 1, 0.5, 1, 1))
    assert round(abs(k), 2) == 0.02 and round(d, 2) == -0.71


def test_k_vanishes():
    mu, a1 = 0.4, 3.0
    k, _ = double_coefficients(Params(a1, a1 * math.exp(-mu) / 2, 0.5, 1, mu))
    assert abs(k) < 1e-15


def test_affine_map_callable(p1):
    F = single_map(p1)
    assert F.kind is MapKind.SINGLE_F and F(2.0) == F.slope * 2.0 + F.intercept
    assert double_map(p1).kind is MapKind.DOUBLE_PHI1


def test_p1_transit(p1):
    h = fixed_point_single(p1).h_star
    tr = single_transit(p1, h)
    assert tr.t1 == pytest.approx(0.4982, abs=1e-4)
    assert tr.t2 == pytest.approx(2.4072, abs=1e-4)
    assert tr.x1 == pytest.approx(-1.90325, abs=1e-5)
    assert tr.x4 == pytest.approx(h, rel=1e-14)
    assert tr.x1 < 0 < tr.x2


def test_transit_zero_limit(p1):
    assert single_transit(p1, 1e-12).t1 == pytest.approx(0.0, abs=1e-11)


def test_x4_is_affine(rng):
    for P, h in random_single(rng, 100):
        m, b = single_coefficients(P)
        assert single_transit(P, h).x4 == pytest.approx(m * h + b, rel=1e-12, abs=1e-12)


def test_x3_is_affine(rng):
    for P, h in random_double(rng, 100):
        k, d = double_coefficients(P)
        assert double_transit(P, h).x3 == pytest.approx(k * h + d, rel=1e-12, abs=1e-12)


def test_double_zero_limit(p2):
    _, d = double_coefficients(p2)
    assert double_transit(p2, 1e-13).x3 == pytest.approx(d, abs=1e-12)


def test_shape_single_p1(p1):
    rep = shape_conditions_single(p1, fixed_point_single(p1).h_star)
    assert rep.satisfied


def test_shape_single_huge_h(p1):
    rep = shape_conditions_single(p1, 1e6)
    assert not rep.satisfied
    assert "t2 < p1" in rep.failed()


def test_shape_double(p2):
    h = fixed_point_double(p2).h_star
    assert shape_conditions_double(p2, h).satisfied


def test_shape_double_short_p2(p2):
    P = Params(p2.a1, p2.a2, p2.p1, 0.3, p2.mu)
    rep = shape_conditions_double(P, 0.5)
    assert "T - p1 >= 1" in rep.failed()


def test_shape_double_rejects_single_orbit(p1):
    assert not shape_conditions_double(p1, fixed_point_single(p1).h_star).satisfied


@given(st.floats(0.05, 5), st.floats(0.05, 5), st.floats(0.5, 5), st.floats(0.5, 5), st.floats(0.05, 2), st.floats(1e-3, 10))
def test_report_is_conjunction(a1, a2, p1, p2, mu, h):
    P = Params(a1, a2, p1, p2, mu)
    for rep in (shape_conditions_single(P, h), shape_conditions_double(P, h)):
        assert rep.satisfied == all(c.holds for c in rep.details)
        assert rep.as_dict()["satisfied"] == rep.satisfied


def test_fixed_point_single(p1):
    fp = fixed_point_single(p1)
    m, b = single_coefficients(p1)
    assert fp.h_star == pytest.approx(1.02159, abs=5e-5)
    assert abs(m * fp.h_star + b - fp.h_star) <= 1e-14 * fp.h_star
    assert fp.stable and fp.classification == "stable"


def test_fixed_point_single_b_negative(p2):
    P = Params(1, 0.17, 1, 4, 0.1)
    _, b = single_coefficients(P)
    assert b < 0
    with pytest.raises(HypothesisFailed, match="b > 0"):
        fixed_point_single(P)


def test_fixed_point_single_shape_gate():
    # a table row whose h* does not realise the assumed transit picture
    with pytest.raises(ShapeFailed) as err:
        fixed_point_single(Params(1, 0.25, 3, 1, 0.5))
    assert "p1 - t2 < 1" in err.value.report.failed()
    assert not fixed_point_single(Params(1, 0.25, 3, 1, 0.5), require_shape=False).shape_ok


def test_fixed_point_double(p2):
    fp = fixed_point_double(p2)
    k, d = double_coefficients(p2)
    assert fp.h_star == pytest.approx(1.8886, abs=1e-4)
    assert abs(k * fp.h_star + d + fp.h_star) <= 1e-14 * fp.h_star
    assert fp.multiplier == pytest.approx(0.0082, abs=1e-4)
    assert fp.stable


def test_fixed_point_double_d_positive():
    P = Params(1, 1, 3, 1, 0.1)
    k, d = double_coefficients(P)
    assert abs(k) < 1 and d > 0
    with pytest.raises(HypothesisFailed, match="d < 0"):
        fixed_point_double(P)


def test_marginal_classification():
    from relaydde.maps import FixedPointResult, Regime

    fp = FixedPointResult(Regime.SINGLE, 1.0, -1.0, shape_conditions_single(Params(1, 1, 3, 1, 1), 1.0))
    assert fp.classification == "marginal" and not fp.stable


def test_phi2_symmetry(p2):
    h = fixed_point_double(p2).h_star
    assert phi2(p2, -h) == pytest.approx(h, rel=1e-14)
    k, d = double_coefficients(p2)
    assert phi2(p2, -1.0) == pytest.approx(-k - d, rel=1e-15)
    with pytest.raises(ValueError):
        phi2(p2, 1.0)


def test_phi2_matches_negative_simulation(p2):
    traj = solve_exact(p2, -1.0, p2.T)
    assert traj.eval(p2.T) == pytest.approx(phi2(p2, -1.0), rel=1e-12)


@given(st.floats(0.01, 3.0))
def test_phi2_mirror(h):
    from relaydde.params import PRESETS

    P = PRESETS["p2"]
    k, d = double_coefficients(P)
    assert phi2(P, -h) == pytest.approx(-(k * h + d), rel=1e-14, abs=1e-15)


def test_composite(p2):
    h = fixed_point_double(p2).h_star
    k, d = double_coefficients(p2)
    assert composite_double(p2, h) == pytest.approx(h, rel=1e-14)
    assert composite_double(p2, 0.0) == k * d - d
    a, b, c = (composite_double(p2, x) for x in (0.5, 1.0, 1.5))
    assert (c - b) / 0.5 == pytest.approx(k * k, rel=1e-9)
    assert (b - a) / 0.5 == pytest.approx(k * k, rel=1e-9)


def test_composite_equals_two_simulated_periods(p2):
    h = 1.7
    assert shape_conditions_double(p2, h).satisfied
    traj = solve_exact(p2, h, 2 * p2.T)
    assert traj.eval(2 * p2.T) == pytest.approx(composite_double(p2, h), rel=1e-11)
