import random

import pytest

from conftest import random_points
from thurston.boundary import (
    BoundaryPoint,
    NormalizedRep,
    accumulation_criterion,
    lipschitz_estimate,
    normalize_rep,
    tree_lipschitz_constant,
)
from thurston.errors import InputError, NotStabilized
from thurston.torus import (
    MeasuredSlope,
    Slope,
    TracePoint,
    enumerate_slopes,
    intersection_number,
    length_of_slope,
)

P333 = TracePoint(3, 3, 3)
ETA = MeasuredSlope(Slope(1, 0))


def test_L_matches_direct_enumeration():
    ref = max(2 * abs(s.q) / length_of_slope(P333, s) for s in enumerate_slopes(12))
    assert tree_lipschitz_constant(P333, ETA, 12) == pytest.approx(ref, rel=1e-14)


def test_L_scaling_exact_for_dyadic_weights():
    for P in random_points(3, 5):
        base = tree_lipschitz_constant(P, ETA)
        for c in (0.25, 0.5, 2.0, 8.0, 1024.0):
            assert tree_lipschitz_constant(P, ETA.scaled(c)) == c * base


def test_L_scaling_general_weights_to_rounding():
    rng = random.Random(1)
    for P in random_points(4, 5):
        eta = MeasuredSlope(Slope(2, 3), 1.7)
        base = tree_lipschitz_constant(P, eta)
        for _ in range(5):
            c = rng.uniform(0.1, 10)
            assert tree_lipschitz_constant(P, eta.scaled(c)) == pytest.approx(c * base, rel=1e-15)


def test_L_never_realized_by_eta_itself():
    for P in random_points(6, 4):
        for s in enumerate_slopes(3):
            est = lipschitz_estimate(P, MeasuredSlope(s), 8)
            assert s not in est.cluster
            assert all(intersection_number(s, a) > 0 for a in est.cluster)


def test_L_monotone_in_depth():
    for P in random_points(8, 4):
        vals = [tree_lipschitz_constant(P, ETA, d) for d in (1, 2, 4, 8, 16)]
        assert vals == sorted(vals)


def test_lipschitz_estimate_flags():
    est = lipschitz_estimate(P333, ETA, 12)
    assert est.stabilized and est.value == est.previous
    assert est.cluster == (Slope(1, 2),)
    assert not lipschitz_estimate(P333, ETA, 2).stabilized


def test_wrappers_are_accepted():
    b = BoundaryPoint(ETA)
    assert b.slope == Slope(1, 0)
    assert b.same_class(BoundaryPoint(ETA.scaled(3)))
    assert not b.same_class(BoundaryPoint(MeasuredSlope(Slope(0, 1))))
    assert tree_lipschitz_constant(P333, b) == tree_lipschitz_constant(P333, ETA)
    with pytest.raises(InputError):
        tree_lipschitz_constant(P333, Slope(1, 0))


def test_normalize_rep():
    rep = normalize_rep(P333, ETA)
    assert isinstance(rep, NormalizedRep) and rep.base == P333
    assert tree_lipschitz_constant(P333, rep) == pytest.approx(1.0, abs=1e-12)
    again = normalize_rep(P333, rep)
    assert again.measured.weight == pytest.approx(rep.measured.weight, rel=1e-6)
    heavy = normalize_rep(P333, ETA.scaled(2.0))
    assert heavy.measured.weight == pytest.approx(rep.measured.weight, rel=1e-12)


def test_normalize_refuses_unstable_depth():
    with pytest.raises(NotStabilized):
        normalize_rep(P333, ETA, depth=2)


def test_criterion_examples():
    ev = accumulation_criterion(P333, ETA, ETA.scaled(2.5))
    assert ev.holds and bool(ev)
    assert ev.contained and not ev.blocking and ev.attained_on_cluster
    ev = accumulation_criterion(P333, ETA, MeasuredSlope(Slope(1, 1)))
    assert not ev.holds
    assert Slope(1, 1) in ev.blocking


def test_criterion_random_pairs_and_antisymmetry():
    rng = random.Random(12)
    slopes = enumerate_slopes(5)
    for P in random_points(13, 25):
        a, b = rng.sample(slopes, 2)
        eta = MeasuredSlope(a, rng.uniform(0.5, 3))
        mu = MeasuredSlope(b, rng.uniform(0.5, 3))
        assert accumulation_criterion(P, eta, eta.scaled(rng.uniform(0.2, 5))).holds
        fwd = accumulation_criterion(P, eta, mu).holds
        back = accumulation_criterion(P, mu, eta).holds
        assert not fwd and not back
        assert not (fwd and back)
