"""Once-punctured torus: Markov-triple trace coordinates and simple closed curves.

A point of Teichmüller space is a triple ``(x, y, z) = (tr A, tr B, tr AB)`` of
a Fuchsian punctured-torus group, so ``x**2 + y**2 + z**2 == x*y*z`` and all
three traces exceed 2. Simple closed curves are indexed by coprime slopes
``(p, q)``; ``(1, 0)`` is A, ``(0, 1)`` is B and ``(1, 1)`` is AB.

Traces of all other curves follow from the Fricke identity
``tr(u + v) = tr(u) tr(v) - tr(u - v)`` for Farey neighbours ``u, v``, applied
down the Stern-Brocot tree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from math import gcd

import numpy as np

from .errors import InputError, NoSuchPoint

RELATION_TOL = 1e-9


@dataclass(frozen=True)
class TracePoint:
    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float, np.floating)) and math.isfinite(v)):
                raise InputError(f"trace {name}={v!r} is not a finite real")
            object.__setattr__(self, name, float(v))
        if min(self.x, self.y, self.z) <= 2.0:
            raise NoSuchPoint(f"traces must exceed 2, got {self.as_tuple()}")
        if abs(self.residual()) > RELATION_TOL * self.x * self.y * self.z:
            raise NoSuchPoint(
                f"{self.as_tuple()} violates x^2+y^2+z^2=xyz "
                f"(residual {self.residual():.3e})"
            )

    def residual(self):
        x, y, z = self.x, self.y, self.z
        return x * x + y * y + z * z - x * y * z

    def as_tuple(self):
        return (self.x, self.y, self.z)

    def __str__(self):
        return f"{self.x!r},{self.y!r},{self.z!r}"


@dataclass(frozen=True, order=True)
class Slope:
    """Coprime pair ``(p, q)`` normalized to ``q >= 0`` and ``(1, 0)`` when ``q == 0``."""

    p: int
    q: int

    def __post_init__(self):
        p, q = int(self.p), int(self.q)
        if (p, q) == (0, 0) or gcd(p, q) != 1:
            raise InputError(f"slope ({p},{q}) is not a coprime pair")
        if q < 0 or (q == 0 and p < 0):
            p, q = -p, -q
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def height(self):
        return max(abs(self.p), self.q)

    def __str__(self):
        return f"{self.p}/{self.q}"


@dataclass(frozen=True)
class MeasuredSlope:
    slope: Slope
    weight: float = 1.0

    def __post_init__(self):
        if not (self.weight > 0 and math.isfinite(self.weight)):
            raise InputError(f"measured slope weight must be positive, got {self.weight}")

    def scaled(self, c):
        return MeasuredSlope(self.slope, self.weight * c)

    def __str__(self):
        return f"{self.slope}:{self.weight!r}"


def parse_point(text):
    """Parse ``"x,y,z"`` into a :class:`TracePoint`."""
    try:
        x, y, z = (float(t) for t in text.split(","))
    except ValueError as exc:
        raise InputError(f"cannot parse point {text!r}; expected x,y,z") from exc
    return TracePoint(x, y, z)


def parse_slope(text):
    """Parse ``"p/q"`` (``"1/0"`` allowed) into a :class:`Slope`."""
    try:
        p, q = (int(t) for t in text.split("/"))
    except ValueError as exc:
        raise InputError(f"cannot parse slope {text!r}; expected p/q") from exc
    return Slope(p, q)


def parse_measured(text):
    """Parse ``"p/q:w"`` (weight defaults to 1)."""
    slope_text, _, weight_text = text.partition(":")
    try:
        weight = float(weight_text) if weight_text else 1.0
    except ValueError as exc:
        raise InputError(f"cannot parse weight in {text!r}") from exc
    return MeasuredSlope(parse_slope(slope_text), weight)


def markov_complete(x, y, root="larger"):
    """Solve ``z**2 - x*y*z + x**2 + y**2 = 0`` for the chosen root."""
    if root not in ("larger", "smaller"):
        raise InputError(f"root must be 'larger' or 'smaller', got {root!r}")
    if x <= 2 or y <= 2:
        raise NoSuchPoint(f"x={x}, y={y} must both exceed 2")
    disc = (x * y) ** 2 - 4.0 * (x * x + y * y)
    if disc < 0:
        raise NoSuchPoint(f"no real z for x={x}, y={y} (discriminant {disc:.6g})")
    s = math.sqrt(disc)
    if root == "larger":
        z = 0.5 * (x * y + s)
    else:
        # Vieta form avoids cancellation in (xy - s) / 2.
        z = 2.0 * (x * x + y * y) / (x * y + s)
    if z <= 2:
        raise NoSuchPoint(f"selected root z={z} does not exceed 2")
    return z


def point_from_xy(x, y, root="larger"):
    return TracePoint(x, y, markov_complete(x, y, root))


def vieta_move(point, coordinate):
    """Replace one coordinate ``c`` by (product of the other two) - ``c``."""
    x, y, z = point.as_tuple()
    if coordinate == "x":
        x = y * z - x
    elif coordinate == "y":
        y = x * z - y
    elif coordinate == "z":
        z = x * y - z
    else:
        raise InputError(f"coordinate must be x, y or z, got {coordinate!r}")
    if min(x, y, z) <= 2:
        raise NoSuchPoint(f"vieta move on {coordinate} leaves the domain")
    return TracePoint(x, y, z)


# Integral matrices M with trace_of_slope(vieta_move(P, c), s) == trace_of_slope(P, M s).
_VIETA_SLOPE_MAPS = {
    "x": ((1, 0), (2, -1)),   # (A, B) -> (A B^2, B^-1)
    "y": ((-1, 2), (0, 1)),   # (A, B) -> (A^-1, A^2 B)
    "z": ((-1, 0), (0, 1)),   # (A, B) -> (A^-1, B)
}


def vieta_slope_map(coordinate):
    """The 2x2 integer matrix relabeling slopes under :func:`vieta_move`."""
    try:
        return _VIETA_SLOPE_MAPS[coordinate]
    except KeyError:
        raise InputError(f"coordinate must be x, y or z, got {coordinate!r}") from None


def apply_slope_map(matrix, slope):
    (a, b), (c, d) = matrix
    return Slope(a * slope.p + b * slope.q, c * slope.p + d * slope.q)


def intersection_number(a, b):
    return abs(a.p * b.q - a.q * b.p)


def enumerate_slopes(depth):
    """All normalized slopes with ``max(|p|, q) <= depth``.

    Ordered by height, then by ``q``, then by ``p``.
    """
    if depth < 1:
        raise InputError(f"depth must be >= 1, got {depth}")
    return list(_enumerate_slopes(int(depth)))


@lru_cache(maxsize=64)
def _enumerate_slopes(depth):
    out = [Slope(1, 0), Slope(0, 1)]
    for h in range(1, depth + 1):
        ring = []
        for q in range(1, h + 1):
            for p in range(-h, h + 1):
                if max(abs(p), q) == h and gcd(p, q) == 1:
                    ring.append(Slope(p, q))
        out.extend(sorted(ring, key=lambda s: (s.q, s.p)))
    # (1, 0) and (0, 1) have height 1 and are already listed first.
    seen = set()
    uniq = []
    for s in out:
        if s not in seen:
            seen.add(s)
            uniq.append(s)
    return tuple(uniq)


def _stern_brocot_path(p, q):
    """Left/right moves from the root (1,1) to the first-quadrant vector (p, q)."""
    moves = []
    lp, lq, rp, rq = 1, 0, 0, 1
    mp, mq = 1, 1
    while (mp, mq) != (p, q):
        # Target is between L and M when it is clockwise of M.
        if p * mq - q * mp > 0:
            moves.append("L")
            rp, rq = mp, mq
        else:
            moves.append("R")
            lp, lq = mp, mq
        mp, mq = lp + rp, lq + rq
    return tuple(moves)


def _descend(tl, tr, td, moves):
    """Run the Fricke recursion along a Stern-Brocot path.

    ``(tl, tr, td)`` are the traces of the left parent, right parent and their
    difference; the result is the trace of the final mediant. Works
    elementwise on numpy arrays.
    """
    for m in moves:
        tm = tl * tr - td
        if m == "L":
            tl, tr, td = tl, tm, tr
        else:
            tl, tr, td = tm, tr, tl
    return tl * tr - td


@lru_cache(maxsize=200_000)
def _trace_cached(x, y, z, p, q):
    if q == 0:
        return x
    if p == 0:
        return y
    if p < 0:
        # Reflection A -> A^-1 sends (x, y, z) to (x, y, xy - z).
        z = x * y - z
        p = -p
    return _descend(x, y, x * y - z, _stern_brocot_path(p, q))


def trace_of_slope(point, slope):
    """Trace of the closed geodesic with the given slope."""
    return _trace_cached(point.x, point.y, point.z, slope.p, slope.q)


def length_of_slope(point, slope):
    """Hyperbolic length ``2 arccosh(tr / 2)``."""
    return 2.0 * math.acosh(trace_of_slope(point, slope) / 2.0)


def slope_traces(xs, ys, zs, slopes):
    """Vectorized traces.

    ``xs, ys, zs`` are arrays of equal shape; returns an array of shape
    ``(len(slopes),) + xs.shape``. Shared Stern-Brocot prefixes are evaluated
    once.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    zs = np.asarray(zs, dtype=float)
    out = np.empty((len(slopes),) + xs.shape)
    quadrants = {
        1: _TreeWalker(xs, ys, zs),
        -1: None,
    }
    for k, s in enumerate(slopes):
        if s.q == 0:
            out[k] = xs
        elif s.p == 0:
            out[k] = ys
        elif s.p > 0:
            out[k] = quadrants[1].trace(s.p, s.q)
        else:
            if quadrants[-1] is None:
                quadrants[-1] = _TreeWalker(xs, ys, xs * ys - zs)
            out[k] = quadrants[-1].trace(-s.p, s.q)
    return out


def slope_lengths(xs, ys, zs, slopes):
    """Vectorized lengths; same shape convention as :func:`slope_traces`."""
    t = slope_traces(xs, ys, zs, slopes)
    return 2.0 * np.arccosh(t / 2.0)


class _TreeWalker:
    """Memoized Stern-Brocot descent for one family of points."""

    def __init__(self, xs, ys, zs):
        # node (p, q) -> traces of (left parent, right parent, their difference)
        self._nodes = {(1, 1): (xs, ys, xs * ys - zs)}

    def trace(self, p, q):
        node = (1, 1)
        lp, lq, rp, rq = 1, 0, 0, 1
        while True:
            tl, tr, td = self._nodes[node]
            tm = tl * tr - td
            if node == (p, q):
                return tm
            mp, mq = node
            if p * mq - q * mp > 0:
                rp, rq = mp, mq
                child_state = (tl, tm, tr)
            else:
                lp, lq = mp, mq
                child_state = (tm, tr, tl)
            node = (lp + rp, lq + rq)
            if node not in self._nodes:
                self._nodes[node] = child_state
