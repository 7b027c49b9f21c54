import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rhombsaw.enumeration import (
    EnumerationOverflow, FugacityError, KahanSum, accumulate, arc_tables, cr_residuals,
    enumerate_walks, observable, rect_partition, two_point,
)
from rhombsaw.tiling import build_rect
from rhombsaw.weights import PI

from oracles import RECT_1_0_PI3, RECT_3_2_MIXED, WALK_COUNTS

COS38 = math.cos(3 * PI / 8)
probabilistic = st.floats(min_value=PI / 3, max_value=2 * PI / 3)


def test_single_rhombus_by_hand():
    rep = rect_partition((PI / 3,), 0)
    for key, value in RECT_1_0_PI3.items():
        assert getattr(rep, key) == pytest.approx(value, abs=1e-15)
    assert rep.walk_count == 3


@pytest.mark.parametrize("case,count", list(WALK_COUNTS.items()))
def test_walk_counts(case, count):
    thetas, L = case
    assert rect_partition(thetas, L).walk_count == count


def test_frozen_rect_values():
    rep = rect_partition((PI / 3, PI / 2, 2 * PI / 3), 2)
    assert (rep.A, rep.B, rep.D, rep.E) == pytest.approx(RECT_3_2_MIXED, abs=1e-14)


def test_kernel_matches_python_walks():
    # the compiled accumulator against explicit walks with independently grouped weights
    dom = build_rect((PI / 3, 1.9), 1)
    tab = arc_tables(dom)
    sums = accumulate(dom, dom.origin)
    by_end = {}
    n = 0
    for w in enumerate_walks(dom, dom.origin):
        assert w.is_self_avoiding()
        by_end[w.end] = by_end.get(w.end, 0.0) + w.weight(tab)
        n += 1
    assert n == int(sums.count.sum())
    for m, value in by_end.items():
        assert sums.weight[m] == pytest.approx(value, abs=1e-14)


def test_winding_is_endpoint_determined():
    thetas = (PI / 3, 1.8, 2.2)
    rep = rect_partition(thetas, 1)
    dom = build_rect(thetas, 1)
    for m, (_, (lo, hi)) in rep.endpoints.items():
        if not math.isfinite(lo):
            continue
        assert hi - lo < 1e-9
        cls = dom.boundary[m]
        k = rep.labels[m][0]
        expected = {"beta": 0.0, "delta": thetas[min(k, 3) - 1], "epsilon": thetas[min(k, 3) - 1] - PI}
        if cls in expected:
            assert lo == pytest.approx(expected[cls], abs=1e-9)
        elif cls == "alpha":
            assert abs(abs(lo) - PI) < 1e-9


def test_length_bounds_visits():
    dom = build_rect((PI / 3, PI / 2), 1)
    sums = accumulate(dom, dom.origin, y=2.0)
    assert sums.max_b_minus_length <= 0.0


@given(st.lists(probabilistic, min_size=1, max_size=3), st.integers(0, 1))
@settings(max_examples=15, deadline=None)
def test_rect_identity_property(thetas, L):
    assert abs(rect_partition(thetas, L).identity_residual()) < 1e-10


@given(st.lists(st.floats(0.2, PI - 0.2), min_size=1, max_size=3), st.integers(0, 1))
@settings(max_examples=15, deadline=None)
def test_discrete_holomorphicity_property(thetas, L):
    # the relation is algebraic, so it also holds with negative weights
    dom = build_rect(thetas, L)
    assert np.max(np.abs(cr_residuals(dom, observable(dom)))) < 1e-10


def test_observable_includes_empty_walk():
    dom = build_rect((PI / 3,), 0)
    F = observable(dom)
    assert F[dom.origin] == pytest.approx(1.0)


def test_fugacity_needs_pi3():
    with pytest.raises(FugacityError):
        rect_partition((PI / 2,), 0, y=2.0)
    with pytest.raises(FugacityError):
        rect_partition((PI / 3, PI / 2), 0, y_right=2.0)


def test_fugacity_observable_cr_away_from_last_column():
    thetas = (PI / 2, PI / 3)
    dom = build_rect(thetas, 1)
    res = cr_residuals(dom, observable(dom, fugacity=2.0))
    cols = np.array([f.column for f in dom.faces])
    assert np.max(np.abs(res[cols < 2])) < 1e-12
    assert np.max(np.abs(res[cols == 2])) > 1e-3


def test_last_column_defect_uses_weighted_two_point():
    # in the last pi/3 column the relation picks up a term proportional to the
    # fugacity-weighted two-point function of the E mid-edge
    y = 2.0
    ystar = 1 + math.sqrt(2)
    coef = (y - 1) * ystar / (y * (ystar - 1))
    dom = build_rect((PI / 2, PI / 3), 1)
    res = cr_residuals(dom, observable(dom, fugacity=y))
    weighted = accumulate(dom, dom.origin, y_right=y).weight
    for f, face in enumerate(dom.faces):
        if face.column != 2:
            continue
        e = dom.mid(2, face.row, "E")
        assert res[f].real == pytest.approx(coef * weighted[e], rel=1e-10)


def test_two_point_symmetry():
    dom = build_rect((PI / 3, 1.7), 1)
    a, b = dom.mid(1, -1, "W"), dom.mid(2, 1, "E")
    assert two_point(dom, a, b) == pytest.approx(two_point(dom, b, a), abs=1e-14)
    with pytest.raises(ValueError):
        two_point(dom, a, a)
    assert two_point(dom, a, a, allow_empty=True) == 1.0


def test_overflow():
    with pytest.raises(EnumerationOverflow):
        rect_partition((PI / 3, PI / 3), 2, max_steps=100)


def test_overflow_env(monkeypatch):
    monkeypatch.setenv("SAW_MAX_WALKS", "10")
    with pytest.raises(EnumerationOverflow):
        rect_partition((PI / 3, PI / 3), 1)


def test_kahan_sum():
    acc = KahanSum()
    for v in [1e16, 1.0, -1e16] * 3:
        acc.add(v)
    assert acc.value == 3.0
