"""Thurston distance on the punctured torus by slope enumeration.

The distance is ``log sup_alpha l_alpha(Y) / l_alpha(X)`` over simple closed
curves. Truncating the sup to the slopes of height ``<= depth`` gives a lower
bound that is nondecreasing in ``depth``; every estimate carries the depth it
was computed at and whether it moved under the last depth doubling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AmbiguousAtDepth, InputError, NonAdditiveChain
from .torus import Slope, TracePoint, enumerate_slopes, slope_lengths

DEFAULT_DEPTH = 12
DEFAULT_GAP = 1e-3
DEFAULT_LAMINATION_GAP = 1e-2


def point_lengths(point, slopes):
    """Lengths of ``slopes`` at a single :class:`TracePoint` as a 1-D array."""
    x, y, z = (np.array(c) for c in point.as_tuple())
    return slope_lengths(x, y, z, slopes)


def _slope_set(depth, slopes):
    if slopes is not None:
        return tuple(slopes)
    return tuple(enumerate_slopes(depth))


def _prefix_len(depth):
    """Number of slopes of height <= depth (enumeration is ordered by height)."""
    return len(enumerate_slopes(depth))


def cluster_mask(ratios, gap):
    """Entries within relative ``gap`` of the maximum ratio."""
    ratios = np.asarray(ratios)
    return ratios >= ratios.max(axis=0) * (1.0 - gap)


@dataclass(frozen=True)
class RatioProfile:
    source: TracePoint
    target: TracePoint
    depth: int
    slopes: tuple
    source_lengths: np.ndarray = field(repr=False)
    target_lengths: np.ndarray = field(repr=False)

    @property
    def ratio_array(self):
        return self.target_lengths / self.source_lengths

    @property
    def ratios(self):
        return dict(zip(self.slopes, self.ratio_array.tolist()))

    def csv_rows(self):
        """Rows ``(p, q, length_src, length_dst, ratio)``."""
        for s, a, b, r in zip(
            self.slopes, self.source_lengths, self.target_lengths, self.ratio_array
        ):
            yield (s.p, s.q, float(a), float(b), float(r))


def ratio_profile(X, Y, depth=DEFAULT_DEPTH, slopes=None):
    if slopes is None and depth < 1:
        raise InputError(f"depth must be >= 1, got {depth}")
    S = _slope_set(depth, slopes)
    return RatioProfile(X, Y, depth, S, point_lengths(X, S), point_lengths(Y, S))


@dataclass(frozen=True)
class DistanceEstimate:
    value: float
    depth: int
    argmax_cluster: tuple
    converged: bool
    previous: float | None = None

    @property
    def slack(self):
        """Increase of the estimate over the last depth doubling."""
        return 0.0 if self.previous is None else self.value - self.previous


def thurston_distance(X, Y, depth=DEFAULT_DEPTH, tol=1e-6, gap=DEFAULT_GAP, slopes=None):
    """Lower bound for ``d_Th(X, Y)`` from slopes of height <= ``depth``.

    When ``slopes`` is given, it replaces the depth enumeration and no
    convergence check is made.
    """
    prof = ratio_profile(X, Y, depth, slopes)
    r = prof.ratio_array
    value = math.log(r.max())
    cluster = tuple(s for s, keep in zip(prof.slopes, cluster_mask(r, gap)) if keep)
    previous = None
    converged = True
    if slopes is None and depth >= 2:
        previous = math.log(r[: _prefix_len(depth // 2)].max())
        converged = (value - previous) <= tol * max(abs(value), 1e-300)
    return DistanceEstimate(value, depth, cluster, converged, previous)


# --- Stern-Brocot bookkeeping for laminations --------------------------------


def stern_brocot_ancestors(slope):
    """Proper ancestors of a slope in the (signed) Stern-Brocot tree."""
    p, q = slope.p, slope.q
    if q == 0 or p == 0:
        return frozenset()
    sign = 1 if p > 0 else -1
    p = abs(p)
    out = {Slope(1, 0), Slope(0, 1)}
    lp, lq, rp, rq = 1, 0, 0, 1
    mp, mq = 1, 1
    while (mp, mq) != (p, q):
        out.add(Slope(sign * mp, mq))
        if p * mq - q * mp > 0:
            rp, rq = mp, mq
        else:
            lp, lq = mp, mq
        mp, mq = lp + rp, lq + rq
    return frozenset(out)


def argmax_sequence(profile):
    """Argmax slope at every height ``1..depth``, consecutive repeats removed.

    Returns ``(sequence, height_of_last_change)``.
    """
    r = profile.ratio_array
    seq = []
    last_change = 1
    for h in range(1, profile.depth + 1):
        n = _prefix_len(h)
        s = profile.slopes[int(np.argmax(r[:n]))]
        if not seq or seq[-1] != s:
            seq.append(s)
            last_change = h
    return tuple(seq), last_change


def is_stern_brocot_descent(seq):
    return all(a in stern_brocot_ancestors(b) for a, b in zip(seq, seq[1:]))


@dataclass(frozen=True)
class LaminationEstimate:
    kind: str  # "rational" or "irrational"
    slope: Slope | None
    convergents: tuple
    gap: float

    @property
    def is_rational(self):
        return self.kind == "rational"


def stretch_lamination(X, Y, depth=DEFAULT_DEPTH, gap=DEFAULT_LAMINATION_GAP):
    """Approximate the maximally stretched lamination ``Lambda(X, Y)``.

    Rational when the top ratio beats every other enumerated slope by the
    relative ``gap``; irrational when the argmax keeps descending the
    Stern-Brocot tree through the upper half of the depth range. Anything
    else raises :class:`AmbiguousAtDepth`.
    """
    if X == Y:
        raise InputError("stretch lamination is undefined for X == Y")
    prof = ratio_profile(X, Y, depth)
    r = prof.ratio_array
    order = np.argsort(-r, kind="stable")
    top, runner = r[order[0]], r[order[1]]
    rel_gap = float(top / runner - 1.0)
    seq, last_change = argmax_sequence(prof)
    if rel_gap >= gap:
        return LaminationEstimate("rational", prof.slopes[order[0]], seq, rel_gap)
    if len(seq) >= 3 and is_stern_brocot_descent(seq) and last_change > depth // 2:
        return LaminationEstimate("irrational", None, seq, rel_gap)
    raise AmbiguousAtDepth(
        f"no isolated argmax (gap {rel_gap:.3g}) and no Stern-Brocot descent "
        f"(argmax sequence {[str(s) for s in seq]})",
        depth=depth,
    )


# --- additivity --------------------------------------------------------------


def additivity_defect(X, Z, Y, depth=DEFAULT_DEPTH):
    """``d(X,Z) + d(Z,Y) - d(X,Y)`` at the given depth."""
    S = _slope_set(depth, None)
    lx, lz, ly = (point_lengths(P, S) for P in (X, Z, Y))
    return float(
        math.log((lz / lx).max()) + math.log((ly / lz).max()) - math.log((ly / lx).max())
    )


def _clusters(P, Q, S, gap):
    r = point_lengths(Q, S) / point_lengths(P, S)
    return frozenset(s for s, keep in zip(S, cluster_mask(r, gap)) if keep)


def lamination_intersection_check(
    X, Z, Y, depth=DEFAULT_DEPTH, gap=DEFAULT_GAP, lamination_gap=DEFAULT_LAMINATION_GAP
):
    """Does ``Lambda(X,Z) & Lambda(Z,Y)`` match ``Lambda(X,Y)`` at this depth?"""
    if Z == X or Z == Y:
        raise InputError("Z must differ from both endpoints")
    est = stretch_lamination(X, Y, depth, lamination_gap)
    S = _slope_set(depth, None)
    if est.is_rational:
        return (_clusters(X, Z, S, gap) & _clusters(Z, Y, S, gap)) == _clusters(
            X, Y, S, gap
        )
    # Irrational: both halves must follow the same Stern-Brocot descent.
    ref = est.convergents
    k = len(ref) - 1
    for P, Q in ((X, Z), (Z, Y)):
        seq, _ = argmax_sequence(ratio_profile(P, Q, depth))
        if tuple(seq[:k]) != tuple(ref[:k]):
            return False
    return True


def normalized_length_profile(chain, slope, depth=DEFAULT_DEPTH, tol=1e-6):
    """Values ``exp(-t_k) * l_slope(P_k)`` along an additive chain.

    ``chain`` is a list of ``(t_k, point)`` with increasing ``t_k``. Raises
    :class:`NonAdditiveChain` unless ``d(P_j, P_k) == t_k - t_j`` within
    ``tol`` for every ``j < k``.
    """
    chain = list(chain)
    if not chain:
        raise InputError("empty chain")
    S = _slope_set(depth, None)
    lengths = [point_lengths(P, S) for _, P in chain]
    for j in range(len(chain)):
        for k in range(j + 1, len(chain)):
            d = math.log((lengths[k] / lengths[j]).max())
            gap = chain[k][0] - chain[j][0]
            if abs(d - gap) > tol:
                raise NonAdditiveChain(
                    f"d(P{j}, P{k}) = {d:.9g} but t{k} - t{j} = {gap:.9g}"
                )
    x, y, z = (np.array([P.as_tuple()[i] for _, P in chain]) for i in range(3))
    ls = slope_lengths(x, y, z, [slope])[0]
    t = np.array([tk for tk, _ in chain])
    return (np.exp(-t) * ls).tolist()
