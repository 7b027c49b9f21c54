import math

import pytest
from hypothesis import given, settings, strategies as st

from rhombsaw.enumeration import FugacityError
from rhombsaw.fugacity import (
    Y_STAR, FugacityParams, b_coefficient, bridge_bound, bridge_reversal_pair, check_bridge_bound,
    check_fugacity_sum_rule, saw_partition_truncated, strip_bridge_reversal, yc_convergence_report,
    yc_report_violations,
)
from rhombsaw.weights import PI, local_weights

from oracles import YC_PI3


def test_b_coefficient_values():
    assert b_coefficient(1.0) == pytest.approx(1.0, abs=1e-15)
    assert b_coefficient(Y_STAR) == pytest.approx(0.0, abs=1e-15)
    assert b_coefficient(2.0) > 0 > b_coefficient(3.0)
    with pytest.raises(ValueError):
        b_coefficient(0.0)


@pytest.mark.parametrize("y", [0.5, 1.0, 2.0, 3.0])
@pytest.mark.parametrize("thetas,L", [((PI / 2, PI / 3), 1), ((2 * PI / 3, PI / 2, PI / 3), 1)])
def test_sum_rule(thetas, L, y):
    chk = check_fugacity_sum_rule(thetas, L, y)
    assert abs(chk.residual) < 1e-9
    assert chk.all_positive


@given(st.floats(0.1, 4.0), st.floats(PI / 3, 2 * PI / 3))
@settings(max_examples=10, deadline=None)
def test_sum_rule_property(y, theta):
    assert abs(check_fugacity_sum_rule((theta, PI / 3), 1, y).residual) < 1e-10


def test_sum_rule_needs_pi3_last():
    with pytest.raises(FugacityError):
        check_fugacity_sum_rule((PI / 3, PI / 2), 1, 2.0)


def test_params():
    assert FugacityParams().y_star == Y_STAR
    with pytest.raises(ValueError):
        FugacityParams(y=-1.0)


def test_truncated_saw_partition_grows_with_fugacity():
    z1 = saw_partition_truncated((PI / 3, PI / 2), 1)
    z2 = saw_partition_truncated((PI / 3, PI / 2), 1, y=2.0)
    assert z2 > z1 > 0
    assert saw_partition_truncated((PI / 3,), 0) == pytest.approx(
        (1 - 1 / math.sqrt(2)) * 2 + 1 / math.sqrt(2 + math.sqrt(2)))


def test_single_rhombus_with_fugacities():
    # straight (length 2), arc to the top (length 1), arc to the bottom (length 2), one visit each
    t = local_weights(PI / 3)
    x, y = 0.7, 1.9
    expected = t.v * x * x * y + t.u1 * x * y + t.u2 * x * x * y
    assert saw_partition_truncated((PI / 3,), 0, x=x, y=y) == pytest.approx(expected, abs=1e-15)


@given(st.floats(0.3, 1.0), st.floats(1.0, 3.0), st.floats(PI / 3, 2 * PI / 3))
@settings(max_examples=15, deadline=None)
def test_surface_fugacity_dominated_by_length_fugacity(x, y, theta):
    # b <= length for every walk, so x^length y^b <= (x y)^length termwise
    thetas = (PI / 3, theta)
    assert saw_partition_truncated(thetas, 1, x=x, y=y) <= saw_partition_truncated(thetas, 1, x=x * y) + 1e-12


@pytest.mark.parametrize("y", [0.5, 1.0, 2.0, 2.4])
@pytest.mark.parametrize("thetas", [(PI / 3,), (PI / 3, PI / 2), (PI / 3, 2 * PI / 3, 1.4)])
def test_bridge_bound(thetas, y):
    B, bound = check_bridge_bound(thetas, y)
    assert 0 < B <= bound


def test_bridge_bound_domain():
    with pytest.raises(ValueError):
        bridge_bound(Y_STAR)


def test_bridge_reversal_rotated_pairing():
    a, b = bridge_reversal_pair((PI / 3, PI / 2), 2, 2.0)
    assert a == pytest.approx(b, abs=1e-13)


def test_bridge_reversal_in_the_strip():
    a, b = strip_bridge_reversal((PI / 3, 1.9), 2.0)
    assert a == pytest.approx(b, abs=1e-12)


def test_yc_report():
    rows = yc_convergence_report(3, mixed=(PI / 3, PI / 2, 2 * PI / 3))
    assert [r.y_c for r in rows] == pytest.approx([YC_PI3[T] for T in (1, 2, 3)], abs=1e-9)
    assert yc_report_violations(rows) == []
    assert rows[0].y_c == pytest.approx(2 + math.sqrt(2), abs=1e-9)


def test_yc_violation_detection():
    from rhombsaw.fugacity import YcRow

    rows = [YcRow(1, 3.0, 3.0 - Y_STAR), YcRow(2, 3.1, 3.1 - Y_STAR, y_c_mixed=3.5)]
    bad = yc_report_violations(rows)
    assert len(bad) == 3
