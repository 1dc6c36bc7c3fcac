import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import random_points
from thurston.errors import AmbiguousAtDepth, InputError, NonAdditiveChain
from thurston.metric import (
    additivity_defect,
    argmax_sequence,
    is_stern_brocot_descent,
    lamination_intersection_check,
    normalized_length_profile,
    ratio_profile,
    stern_brocot_ancestors,
    stretch_lamination,
    thurston_distance,
)
from thurston.pairs import IRRATIONAL, RATIONAL
from thurston.torus import (
    Slope,
    TracePoint,
    apply_slope_map,
    enumerate_slopes,
    length_of_slope,
    point_from_xy,
    vieta_move,
    vieta_slope_map,
)

P333 = TracePoint(3, 3, 3)
P336 = TracePoint(3, 3, 6)


def test_profile_identity_and_columns():
    prof = ratio_profile(P333, P333, 5)
    assert np.all(prof.ratio_array == 1.0)
    rows = list(prof.csv_rows())
    assert len(rows) == len(enumerate_slopes(5))
    assert rows[0][:2] == (1, 0)


def test_profile_uses_stored_lengths():
    prof = ratio_profile(P333, P336, 4)
    r = prof.ratios[Slope(1, 0)]
    assert r == length_of_slope(P336, Slope(1, 0)) / length_of_slope(P333, Slope(1, 0))
    s = Slope(1, 1)
    assert prof.ratios[s] == pytest.approx(math.acosh(3.0) / math.acosh(1.5))


def test_profile_swap_reciprocal():
    X, Y = random_points(4, 2)
    a = ratio_profile(X, Y, 6).ratio_array
    b = ratio_profile(Y, X, 6).ratio_array
    assert np.allclose(a * b, 1.0, rtol=1e-14)


def test_distance_zero_exactly():
    for P in random_points(9, 5):
        for depth in (1, 4, 12):
            assert thurston_distance(P, P, depth).value == 0.0


def test_distance_depth_monotone_and_flags():
    X, Y = random_points(21, 2)
    vals = [thurston_distance(X, Y, d) for d in (1, 2, 4, 8, 16)]
    assert all(b.value >= a.value for a, b in zip(vals, vals[1:]))
    est = vals[-1]
    assert est.depth == 16 and est.previous is not None
    assert est.slack == pytest.approx(est.value - est.previous)
    assert est.argmax_cluster


def test_distance_asymmetry_exists():
    pts = random_points(33, 40)
    gaps = [
        abs(thurston_distance(a, b).value - thurston_distance(b, a).value)
        for a, b in zip(pts[::2], pts[1::2])
    ]
    assert max(gaps) > 0.01


@pytest.mark.parametrize("c", ["x", "y", "z"])
def test_distance_vieta_invariance(c):
    M = vieta_slope_map(c)
    S = enumerate_slopes(10)
    moved = [apply_slope_map(M, s) for s in S]
    pts = random_points(17, 6)
    for X, Y in zip(pts[::2], pts[1::2]):
        a = thurston_distance(vieta_move(X, c), vieta_move(Y, c), slopes=S).value
        b = thurston_distance(X, Y, slopes=moved).value
        assert abs(a - b) <= 1e-9


def test_custom_slopes_skip_convergence():
    X, Y = random_points(1, 2)
    est = thurston_distance(X, Y, slopes=enumerate_slopes(3))
    assert est.previous is None and est.converged


def test_stern_brocot_ancestors():
    assert stern_brocot_ancestors(Slope(1, 0)) == frozenset()
    assert stern_brocot_ancestors(Slope(1, 1)) == {Slope(1, 0), Slope(0, 1)}
    assert stern_brocot_ancestors(Slope(2, 3)) == {
        Slope(1, 0), Slope(0, 1), Slope(1, 1), Slope(1, 2)
    }
    assert Slope(-1, 2) in stern_brocot_ancestors(Slope(-2, 5))
    assert is_stern_brocot_descent([Slope(0, 1), Slope(1, 2), Slope(1, 3), Slope(2, 5)])
    assert not is_stern_brocot_descent([Slope(1, 2), Slope(2, 1)])


def test_stretch_lamination_rational_example():
    Y = point_from_xy(6, 3, "smaller")
    est = stretch_lamination(P333, Y, 12, 1e-2)
    assert est.is_rational and est.slope == Slope(1, 0)
    assert est.gap > 2e-2
    # argmax is stable under depth doubling
    assert stretch_lamination(P333, Y, 24, 1e-2).slope == Slope(1, 0)


def test_stretch_lamination_curated_kinds():
    assert stretch_lamination(RATIONAL.X, RATIONAL.Y).is_rational
    est = stretch_lamination(IRRATIONAL.X, IRRATIONAL.Y)
    assert est.kind == "irrational" and est.slope is None
    assert is_stern_brocot_descent(est.convergents)


def test_stretch_lamination_errors():
    with pytest.raises(InputError):
        stretch_lamination(P333, P333)
    # a gap larger than any real separation leaves no rational verdict, and a
    # single argmax slope is no descent either
    with pytest.raises(AmbiguousAtDepth) as info:
        stretch_lamination(P333, P336, 3, gap=10.0)
    assert info.value.depth == 3


def test_argmax_sequence_shape():
    prof = ratio_profile(IRRATIONAL.X, IRRATIONAL.Y, 12)
    seq, last = argmax_sequence(prof)
    assert all(a != b for a, b in zip(seq, seq[1:]))
    assert 1 <= last <= 12


def test_additivity_defect_endpoints():
    X, Y = random_points(2, 2)
    assert additivity_defect(X, X, Y) == 0.0
    assert additivity_defect(X, Y, Y) == 0.0


def test_triangle_defect_bounded_below():
    pts = random_points(77, 30)
    for X, Z, Y in zip(pts[::3], pts[1::3], pts[2::3]):
        eps = sum(
            thurston_distance(P, Q, 24).value - thurston_distance(P, Q, 12).value
            for P, Q in ((X, Z), (Z, Y))
        )
        assert additivity_defect(X, Z, Y, 12) >= -2 * eps - 1e-12


def test_lamination_check_negative_control():
    X, Y = RATIONAL.X, RATIONAL.Y
    far = point_from_xy(3.0, 6.0, "larger")
    assert additivity_defect(X, far, Y) > 0.1
    assert not lamination_intersection_check(X, far, Y)
    with pytest.raises(InputError):
        lamination_intersection_check(X, X, Y)


def test_normalized_profile_examples():
    X, Y = RATIONAL.X, RATIONAL.Y
    s = Slope(1, 2)
    (v,) = normalized_length_profile([(0.0, X)], s)
    assert v == length_of_slope(X, s)
    d = thurston_distance(X, Y).value
    a, b = normalized_length_profile([(0.0, X), (d, Y)], s)
    assert b <= a * (1 + 1e-9)
    with pytest.raises(NonAdditiveChain):
        normalized_length_profile([(0.0, X), (d + 0.5, Y)], s)
    with pytest.raises(InputError):
        normalized_length_profile([], s)


@settings(max_examples=30, deadline=None)
@given(
    a=st.tuples(st.floats(2.3, 6.0), st.floats(2.3, 6.0)),
    b=st.tuples(st.floats(2.3, 6.0), st.floats(2.3, 6.0)),
)
def test_distance_nonnegative_at_depth(a, b):
    for x, y in (a, b):
        assume((x * y) ** 2 >= 4 * (x * x + y * y))
    X = point_from_xy(*a, "larger")
    Y = point_from_xy(*b, "larger")
    # the sup over slopes of length ratios at two distinct points always exceeds 1
    assert thurston_distance(X, Y, 8).value >= -1e-12
