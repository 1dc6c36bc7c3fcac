"""Property suites behind ``thurston selftest``.

Each suite returns ``{"name", "passed", "detail"}``. Quick mode shrinks the
sample counts so the whole run takes a few seconds.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction

import numpy as np

from .boundary import accumulation_criterion, tree_lipschitz_constant
from .errors import FluxImbalance, NoSuchPoint
from .fixtures import fixture_suite
from .metric import additivity_defect, thurston_distance
from .torus import (
    MeasuredSlope,
    enumerate_slopes,
    point_from_xy,
    trace_of_slope,
)
from .traintrack import (
    add_stump_weights,
    check_switch_conditions,
    cut,
    is_straightenable,
    straighten_lift,
)


def christoffel_trace(point, slope):
    """Trace of the Christoffel word of ``slope`` in an explicit SL(2, R) pair."""
    x, y, z = point.as_tuple()
    s = (-z - math.sqrt(z * z - 4.0)) / 2.0
    A = np.array([[x, 1.0], [-1.0, 0.0]])
    B = np.array([[0.0, s], [-1.0 / s, y]])
    p, q = slope.p, slope.q
    if q == 0:
        return x
    if p == 0:
        return y
    if p < 0:
        A = np.linalg.inv(A)
        p = -p
    M = np.eye(2)
    n = p + q
    for i in range(1, n + 1):
        M = M @ (B if (i * q) // n > ((i - 1) * q) // n else A)
    return abs(float(np.trace(M)))


def random_point(rng):
    while True:
        try:
            return point_from_xy(
                rng.uniform(2.2, 7.0), rng.uniform(2.2, 7.0), rng.choice(("larger", "smaller"))
            )
        except NoSuchPoint:
            continue


def suite_tracks(n, seed):
    bad = []
    for k, fx in enumerate(fixture_suite(n, seed)):
        d = fx.track
        w = straighten_lift(d, fx.far)
        if not check_switch_conditions(d.track, w) or cut(d, w) != fx.far:
            bad.append(f"round trip #{k}")
        for s in fx.stump_cycles:
            w2 = add_stump_weights(d, w, s, Fraction(k % 5, 2))
            if not check_switch_conditions(d.track, w2) or cut(d, w2) != fx.far:
                bad.append(f"twist #{k}")
        if fx.unbalanced is not None:
            ok = is_straightenable(d, fx.unbalanced)
            try:
                straighten_lift(d, fx.unbalanced)
                lifted = True
            except FluxImbalance:
                lifted = False
            if ok != lifted or ok:
                bad.append(f"flux #{k}")
    return not bad, f"{n} fixtures" + (f"; failures {bad[:5]}" if bad else "")


def suite_traces(n, depth, seed):
    rng = random.Random(seed)
    worst = 0.0
    slopes = enumerate_slopes(depth)
    for _ in range(n):
        P = random_point(rng)
        for s in slopes:
            a, b = trace_of_slope(P, s), christoffel_trace(P, s)
            worst = max(worst, abs(a - b) / abs(b))
    return worst <= 1e-9, f"max relative error {worst:.2e} over {n} points"


def suite_metric(n, seed):
    rng = random.Random(seed)
    problems = []
    asym = 0
    for _ in range(n):
        X, Y, Z = random_point(rng), random_point(rng), random_point(rng)
        if thurston_distance(X, X).value != 0.0:
            problems.append("d(X,X) != 0")
        vals = [thurston_distance(X, Y, d).value for d in (3, 6, 12)]
        if any(b < a for a, b in zip(vals, vals[1:])):
            problems.append("depth monotonicity")
        e12 = thurston_distance(X, Y, 12)
        eps = sum(
            thurston_distance(P, Q, 24).value - thurston_distance(P, Q, 12).value
            for P, Q in ((X, Z), (Z, Y), (X, Y))
        )
        if additivity_defect(X, Z, Y, 12) < -2 * eps - 1e-12:
            problems.append("triangle")
        if abs(e12.value - thurston_distance(Y, X, 12).value) > 0.01:
            asym += 1
    ok = not problems and asym >= min(10, n // 4)
    return ok, f"{n} triples, {asym} asymmetric pairs" + (f"; {problems[:3]}" if problems else "")


def suite_boundary(n, seed):
    rng = random.Random(seed)
    slopes = enumerate_slopes(5)
    problems = []
    for _ in range(n):
        P = random_point(rng)
        a, b = rng.sample(slopes, 2)
        eta = MeasuredSlope(a, rng.uniform(0.5, 3.0))
        if tree_lipschitz_constant(P, eta.scaled(4.0)) != 4.0 * tree_lipschitz_constant(P, eta):
            problems.append("homogeneity")
        try:
            if not accumulation_criterion(P, eta, MeasuredSlope(a, 2.0)).holds:
                problems.append("reflexive")
            fwd = accumulation_criterion(P, eta, MeasuredSlope(b)).holds
            back = accumulation_criterion(P, MeasuredSlope(b), eta).holds
            if fwd or back:
                problems.append("distinct")
        except Exception as exc:  # AmbiguousAtDepth counts as a failure here
            problems.append(type(exc).__name__)
    return not problems, f"{n} slope pairs" + (f"; {problems[:3]}" if problems else "")


def run_all(seed=0, quick=True):
    plans = [
        ("train tracks", lambda: suite_tracks(20 if quick else 100, seed)),
        ("trace oracle", lambda: suite_traces(5 if quick else 50, 12, seed)),
        ("metric axioms", lambda: suite_metric(12 if quick else 100, seed)),
        ("boundary", lambda: suite_boundary(10 if quick else 50, seed)),
    ]
    out = []
    for name, fn in plans:
        passed, detail = fn()
        out.append({"name": name, "passed": bool(passed), "detail": detail})
    return out
