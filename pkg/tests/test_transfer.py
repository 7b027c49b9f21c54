import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rhombsaw.enumeration import rect_partition, two_point
from rhombsaw.tiling import build_rect
from rhombsaw.transfer import (
    BETA, BULK, CLOSE, DONE, EMPTY, FREE, NOCLASS, OPEN, ORIGIN, ORIGIN_ROW, BracketError, RowKind,
    TransferError, TransferMatrix, empty_state, growth_rate, power_iteration, row_transitions,
    state_space, strip_partition, width_one_closed_form, yc_strip,
)
from rhombsaw.weights import PI, LocalState, local_weights

from oracles import B1_PI3, STRIP_PI3, YC1_PI3

COS38 = math.cos(3 * PI / 8)
probabilistic = st.floats(min_value=PI / 3, max_value=2 * PI / 3)


def _row_weight(thetas, src, dst, kind, y=1.0):
    return TransferMatrix(thetas, y=y).row_weight(src, dst, kind)


def test_row_examples_width_one():
    th = PI / 3
    v = local_weights(th).v
    # nothing in, nothing out: only the empty plaquette
    assert _row_weight((th,), empty_state(1), empty_state(1), RowKind(alpha=False, beta=False)) == 1.0
    # origin inserted and leaving through the right side in the same row
    assert _row_weight((th,), empty_state(1), (DONE, BETA), ORIGIN_ROW, y=2.0) == pytest.approx(2 * v)
    # origin strand crossing the row vertically
    assert _row_weight((th,), (ORIGIN, NOCLASS), (ORIGIN, NOCLASS), BULK, y=2.0) == pytest.approx(2 * v)


def test_row_transitions_structure():
    out = row_transitions(empty_state(2), 2, RowKind(alpha=False, beta=False))
    dsts = {d for d, _ in out}
    assert empty_state(2) in dsts
    assert (OPEN, CLOSE, NOCLASS) in dsts
    # a pair can never be closed on itself
    out = row_transitions((OPEN, CLOSE, NOCLASS), 2, RowKind(alpha=False, beta=False))
    for _, states in out:
        assert states != (LocalState.A_SE, LocalState.A_WS)
    with pytest.raises(TransferError):
        row_transitions((ORIGIN, NOCLASS), 1, ORIGIN_ROW)
    with pytest.raises(TransferError):
        RowKind(origin=True, alpha=True)


def test_state_space_invariants():
    sp = state_space(4)
    for st_ in sp.states:
        if st_[0] == DONE:
            continue
        s = st_[:4]
        assert s.count(ORIGIN) <= 1 and s.count(FREE) <= 1
        depth = 0
        for c in s:
            depth += (c == OPEN) - (c == CLOSE)
            assert depth >= 0
        assert depth == 0
        assert (FREE in s) == (st_[4] != NOCLASS)
    with pytest.raises(TransferError):
        state_space(9)
    with pytest.raises(TransferError):
        state_space(0)


BRUTE_CASES = [(th, y) for th in ((PI / 3,), (PI / 3, PI / 2), (PI / 2, 2 * PI / 3), (PI / 3, 2 * PI / 3, PI / 2))
               for y in (1.0, 2.0) if y == 1.0 or th[0] == PI / 3]  # fugacity needs a pi/3 first column


@pytest.mark.parametrize("thetas,y", BRUTE_CASES)
def test_matches_brute_force(thetas, y):
    tm = TransferMatrix(thetas, y=y)
    for L in range(0, 3 if len(thetas) == 3 else 4):
        ref = rect_partition(thetas, L, y=y)
        got = tm.rect(L)
        for k in "ABDE":
            assert got[k] == pytest.approx(getattr(ref, k), abs=1e-12)


@given(st.lists(probabilistic, min_size=1, max_size=3), st.integers(0, 2))
@settings(max_examples=10, deadline=None)
def test_matches_brute_force_random(thetas, L):
    ref = rect_partition(thetas, L)
    got = TransferMatrix(thetas).rect(L)
    for k in "ABDE":
        assert got[k] == pytest.approx(getattr(ref, k), abs=1e-12)


def test_series_equals_direct_sweep():
    tm = TransferMatrix((PI / 3, 1.9, 1.3))
    for L, vals in tm.rect_series(4):
        direct = tm.rect(L)
        for k in "ABDE":
            assert vals[k] == pytest.approx(direct[k], abs=1e-14)


def test_endpoint_two_point_matches_brute_force():
    thetas, L = (PI / 3, PI / 2, 2 * PI / 3), 2
    tm = TransferMatrix(thetas)
    dom = build_rect(thetas, L)
    for row in (-2, -1, 1, 2):
        g = two_point(dom, dom.origin, dom.mid(1, row, "W"))
        assert tm.endpoint_two_point(L, "alpha", row) == pytest.approx(g, abs=1e-14)
    for row in (-2, 0, 2):
        g = two_point(dom, dom.origin, dom.mid(3, row, "E"))
        assert tm.endpoint_two_point(L, "beta", row) == pytest.approx(g, abs=1e-14)
    g = two_point(dom, dom.mid(1, 1, "W"), dom.mid(1, -2, "W"))
    assert tm.endpoint_two_point(L, "alpha", -2, start_row=1) == pytest.approx(g, abs=1e-14)
    with pytest.raises(TransferError):
        tm.endpoint_two_point(L, "alpha", 0)


def test_alpha_sum_equals_A():
    thetas, L = (PI / 3, 1.8), 3
    tm = TransferMatrix(thetas)
    total = sum(tm.endpoint_two_point(L, "alpha", r) for r in range(-L, L + 1) if r != 0)
    assert total == pytest.approx(tm.rect(L)["A"], abs=1e-13)


def test_monotone_in_L():
    rep = strip_partition((PI / 3, PI / 2, 2 * PI / 3), L=25)
    A = [v["A"] for _, v in rep.history]
    B = [v["B"] for _, v in rep.history]
    assert all(b >= a - 1e-15 for a, b in zip(A, A[1:]))
    assert all(b >= a - 1e-15 for a, b in zip(B, B[1:]))
    for _, v in rep.history:
        assert abs(COS38 * v["A"] + v["B"] + v["D"] + v["E"] - 1) < 1e-12


def test_width_one_closed_forms():
    rep = strip_partition((PI / 3,))
    assert rep.converged
    assert rep.B == pytest.approx(B1_PI3, abs=1e-9)
    cf = width_one_closed_form(PI / 3)
    assert rep.A == pytest.approx(cf["A"], abs=1e-9)
    assert cf["B"] == pytest.approx(B1_PI3, abs=1e-14)


@pytest.mark.parametrize("T", [1, 2, 3, 4])
def test_strip_values_frozen(T):
    rep = strip_partition((PI / 3,) * T)
    assert (rep.A, rep.B) == pytest.approx(STRIP_PI3[T], abs=1e-10)
    assert rep.A <= 1 / COS38 + 1e-9 and 0 <= rep.B <= 1 + 1e-9


def test_divergent_series_is_reported():
    rep = strip_partition((PI / 3,), y=4.0, L_max=60)
    assert not rep.converged
    assert rep.B > 1e3


def test_fugacity_preconditions():
    with pytest.raises(TransferError):
        TransferMatrix((PI / 2,), y=2.0)
    with pytest.raises(TransferError):
        TransferMatrix((PI / 3, PI / 2), y_right=2.0)
    with pytest.raises(TransferError):
        yc_strip((PI / 2, PI / 3))


def test_power_iteration_against_dense_eigenvalues():
    for thetas, y in (((PI / 3,), 1.0), ((PI / 3, PI / 2), 2.5), ((PI / 3, 2.0, 1.5), 3.0)):
        tm = TransferMatrix(thetas, y=y)
        M = tm.matrix(BULK)
        idx = tm.sector("origin")
        sub = M[idx][:, idx]
        dense = np.max(np.abs(np.linalg.eigvals(sub.toarray())))
        assert power_iteration(sub) == pytest.approx(dense, abs=1e-9)


def test_sectors_share_growth_rate():
    tm = TransferMatrix((PI / 3, PI / 2, PI / 3), y=2.0)
    M = tm.matrix(BULK)
    r = [power_iteration(M[i][:, i]) for i in (tm.sector("origin"), tm.sector("below"))]
    assert r[0] == pytest.approx(r[1], abs=1e-9)


def test_yc_width_one():
    assert yc_strip((PI / 3,)) == pytest.approx(YC1_PI3, abs=1e-9)
    assert growth_rate((PI / 3,), 1.0) == pytest.approx(local_weights(PI / 3).v, abs=1e-12)


def test_yc_bracket_failure():
    with pytest.raises(BracketError):
        yc_strip((PI / 3,), bracket=(1.0, 2.0))


def test_yc_monotonicities():
    third = yc_strip((PI / 3, PI / 2, 2 * PI / 3))
    assert yc_strip((PI / 3, PI / 2)) >= third
    assert yc_strip((PI / 3,) * 3) >= third
    assert third > 1 + math.sqrt(2)


def test_empty_state_row():
    tm = TransferMatrix((PI / 3, PI / 2))
    assert tm.row_weight(empty_state(2), empty_state(2), BULK) == 1.0
    assert EMPTY == 0
