import math

import pytest
from hypothesis import given, strategies as st

from rhombsaw.weights import (
    PI, AngleError, LocalState, arc_length, check_angle, is_probabilistic, left_triangle_visits,
    local_weights, parse_angle, parse_angles, right_triangle_visits, state_from_arcs,
    state_length, state_turning, state_weight, turning, wrap_angle, y_star,
)

from oracles import WEIGHTS_PI3

angles = st.floats(min_value=1e-3, max_value=PI - 1e-3)


def test_pi3_table():
    t = local_weights(PI / 3)
    for name, value in WEIGHTS_PI3.items():
        assert getattr(t, name) == pytest.approx(value, abs=1e-15)
    assert t.w2 == 0.0


def test_pi2_is_symmetric():
    t = local_weights(PI / 2)
    assert t.u1 == pytest.approx(t.u2, abs=1e-15)
    assert t.w1 == pytest.approx(t.w2, abs=1e-15)


@given(angles)
def test_swap_symmetry(theta):
    t, s = local_weights(theta), local_weights(PI - theta)
    assert s.u1 == pytest.approx(t.u2, abs=1e-12)
    assert s.v == pytest.approx(t.v, abs=1e-12)
    assert s.w1 == pytest.approx(t.w2, abs=1e-12)
    assert t.swapped().u1 == t.u2


@given(angles)
def test_single_rhombus_sum_rule(theta):
    # straight + arc to the top + arc to the bottom, each with its winding factor
    t = local_weights(theta)
    total = t.v + t.u1 * math.cos(3 * theta / 8) + t.u2 * math.cos(3 * (PI - theta) / 8)
    assert total == pytest.approx(1.0, abs=1e-12)


@given(st.floats(min_value=PI / 3, max_value=2 * PI / 3))
def test_probabilistic_range_nonnegative(theta):
    t = local_weights(theta)
    assert min(t.u1, t.u2, t.v, t.w1, t.w2) >= -1e-15
    assert is_probabilistic(theta)


def test_negative_weight_outside_range():
    assert local_weights(0.5).w2 < 0
    assert not is_probabilistic(0.5)


@pytest.mark.parametrize("bad", [0.0, PI, -1.0, 4.0])
def test_angle_domain(bad):
    with pytest.raises(AngleError):
        local_weights(bad)
    with pytest.raises(AngleError):
        check_angle(bad)


@pytest.mark.parametrize("token,value", [
    ("pi/3", PI / 3), ("2pi/3", 2 * PI / 3), ("2*pi/3", 2 * PI / 3), (" PI / 2 ", PI / 2), ("1.25", 1.25),
])
def test_parse_angle(token, value):
    assert parse_angle(token) == pytest.approx(value, rel=1e-15)


def test_parse_angles_and_errors():
    assert parse_angles("pi/3, pi/2,") == [PI / 3, PI / 2]
    with pytest.raises(AngleError):
        parse_angle("pi/0")
    with pytest.raises(AngleError):
        parse_angle("half")


def test_state_weights_and_classes():
    th = 1.1
    t = local_weights(th)
    assert state_weight(LocalState.E0, th) == 1.0
    assert state_weight(LocalState.A_WN, th) == t.u1
    assert state_weight(LocalState.A_NE, th) == t.u2
    assert state_weight(LocalState.S_NS, th) == t.v
    assert state_weight(LocalState.D_WS_NE, th) == t.w2
    with pytest.raises(ValueError):
        state_weight(9, th)


def test_state_from_arcs():
    assert state_from_arcs([("W", "N"), ("S", "E")]) is LocalState.D_WN_SE
    with pytest.raises(ValueError):
        state_from_arcs([("W", "E"), ("N", "S")])  # crossing


def test_lengths():
    th = PI / 3
    assert arc_length("WN", th) == pytest.approx(1.0)
    assert arc_length("WS", th) == pytest.approx(2.0)
    assert arc_length("WE", th) == 2.0
    assert state_length(LocalState.D_WS_NE, th) == pytest.approx(4.0)


@given(st.floats(min_value=-50, max_value=50))
def test_wrap_angle_range(a):
    w = wrap_angle(a)
    assert -PI < w <= PI
    assert math.isclose(math.cos(w), math.cos(a), abs_tol=1e-9)


def test_turning_values():
    th = PI / 3
    assert turning("W", "E", th) == pytest.approx(0.0)
    assert turning("W", "N", th) == pytest.approx(th)
    assert turning("W", "S", th) == pytest.approx(th - PI)
    assert turning("N", "W", th) == pytest.approx(-th)
    with pytest.raises(ValueError):
        state_turning(LocalState.A_WN, ("W", "E"), th)


@given(angles, st.sampled_from(["W", "N", "E", "S"]), st.sampled_from(["W", "N", "E", "S"]))
def test_turning_reversal(theta, a, b):
    if a != b:
        assert turning(a, b, theta) == pytest.approx(-turning(b, a, theta), abs=1e-12)


def test_triangle_visits():
    assert left_triangle_visits(LocalState.A_WN) == 1
    assert left_triangle_visits(LocalState.A_SE) == 0
    assert left_triangle_visits(LocalState.D_WN_SE) == 1
    assert right_triangle_visits(LocalState.D_WN_SE) == 1
    assert right_triangle_visits(LocalState.S_WE) == 1
    with pytest.raises(ValueError):
        left_triangle_visits(LocalState.D_WS_NE)


def test_y_star():
    assert y_star() == pytest.approx(1 + math.sqrt(2), abs=1e-15)
