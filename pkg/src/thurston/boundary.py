"""Boundary functionals for rational measured laminations on the torus.

For a weighted slope ``eta``, the Lipschitz constant to its dual tree is
``L(X, eta) = sup_alpha 2 w i(eta, alpha) / l_alpha(X)``; ``eta_X`` rescales
``eta`` so that this constant is 1.

The stretch direction toward ``eta`` is approximated by the slopes that
realize ``L`` (within a relative gap). The slope of ``eta`` itself has zero
intersection with ``eta`` and can never be among them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousAtDepth, InputError, NotStabilized
from .metric import DEFAULT_DEPTH, DEFAULT_GAP, cluster_mask, point_lengths
from .torus import MeasuredSlope, enumerate_slopes, intersection_number


@dataclass(frozen=True)
class BoundaryPoint:
    measured: MeasuredSlope

    @property
    def slope(self):
        return self.measured.slope

    def same_class(self, other):
        """Projective equality: rational classes agree iff their slopes do."""
        return self.slope == other.slope


@dataclass(frozen=True)
class NormalizedRep:
    measured: MeasuredSlope
    base: object  # TracePoint


@dataclass(frozen=True)
class LipschitzEstimate:
    value: float
    depth: int
    previous: float
    stabilized: bool
    cluster: tuple  # slopes within the gap of the max


def _as_measured(eta):
    if isinstance(eta, BoundaryPoint):
        return eta.measured
    if isinstance(eta, NormalizedRep):
        return eta.measured
    if not isinstance(eta, MeasuredSlope):
        raise InputError(f"expected a measured slope, got {type(eta).__name__}")
    return eta


def _unit_ratios(X, slope, depth):
    S = tuple(enumerate_slopes(depth))
    inter = np.array([intersection_number(slope, a) for a in S], dtype=float)
    return S, 2.0 * inter / point_lengths(X, S)


def tree_lipschitz_constant(X, eta, depth=DEFAULT_DEPTH):
    """``max_alpha 2 w i(eta, alpha) / l_alpha(X)`` over slopes of height <= depth."""
    m = _as_measured(eta)
    _, r = _unit_ratios(X, m.slope, depth)
    return m.weight * float(r.max())


def lipschitz_estimate(X, eta, depth=DEFAULT_DEPTH, tol=1e-6, gap=DEFAULT_GAP):
    """``L`` with the value at ``depth // 2`` and a stabilization flag."""
    m = _as_measured(eta)
    S, r = _unit_ratios(X, m.slope, depth)
    n_half = len(enumerate_slopes(max(1, depth // 2)))
    top = float(r.max())
    prev = float(r[:n_half].max())
    value = m.weight * top
    previous = m.weight * prev
    stable = (top - prev) <= tol * top
    cluster = tuple(s for s, k in zip(S, cluster_mask(r, gap)) if k)
    return LipschitzEstimate(value, depth, previous, stable, cluster)


def normalize_rep(X, eta, depth=DEFAULT_DEPTH, tol=1e-6):
    """Rescale ``eta`` so that ``L(X, eta_X) = 1``.

    Refuses with :class:`NotStabilized` when ``L`` still moves by more than
    ``tol`` (relative) between ``depth // 2`` and ``depth``.
    """
    m = _as_measured(eta)
    est = lipschitz_estimate(X, m, depth, tol)
    if not est.stabilized:
        raise NotStabilized(
            f"L(X, {m}) moved from {est.previous!r} to {est.value!r} "
            f"between depth {depth // 2} and {depth}"
        )
    return NormalizedRep(MeasuredSlope(m.slope, m.weight / est.value), X)


@dataclass(frozen=True)
class AccumulationEvidence:
    holds: bool
    cluster_eta: tuple
    cluster_mu: tuple
    contained: bool
    blocking: tuple  # slopes with i(mu, a) = 0 < i(eta, a)
    max_ratio: float
    attained_on_cluster: bool

    def __bool__(self):
        return self.holds


def _decide(X, m_eta, m_mu, depth, gap):
    S, r_eta = _unit_ratios(X, m_eta.slope, depth)
    _, r_mu = _unit_ratios(X, m_mu.slope, depth)
    c_eta = frozenset(s for s, k in zip(S, cluster_mask(r_eta, gap)) if k)
    c_mu = frozenset(s for s, k in zip(S, cluster_mask(r_mu, gap)) if k)
    contained = c_eta <= c_mu
    # normalized weights; the scale does not move the argmax below
    w_eta = m_eta.weight / (m_eta.weight * r_eta.max())
    w_mu = m_mu.weight / (m_mu.weight * r_mu.max())
    i_eta = np.array([intersection_number(m_eta.slope, a) for a in S], dtype=float)
    i_mu = np.array([intersection_number(m_mu.slope, a) for a in S], dtype=float)
    blocking = tuple(s for s, a, b in zip(S, i_eta, i_mu) if b == 0 and a > 0)
    if blocking:
        max_ratio = float("inf")
        attained = False
    else:
        live = i_mu > 0
        ratio = np.zeros(len(S))
        ratio[live] = (w_eta * i_eta[live]) / (w_mu * i_mu[live])
        max_ratio = float(ratio.max())
        near = {s for s, k, v in zip(S, live, ratio) if k and v >= max_ratio * (1.0 - gap)}
        attained = bool(near & c_eta)
    holds = contained and not blocking and attained
    return AccumulationEvidence(
        holds,
        tuple(sorted(c_eta)),
        tuple(sorted(c_mu)),
        contained,
        blocking,
        max_ratio,
        attained,
    )


def accumulation_criterion(X, eta, mu, depth=DEFAULT_DEPTH, gap=DEFAULT_GAP):
    """Does ``mu`` pass the accumulation test for envelopes from ``X`` toward ``eta``?

    Holds iff the ``L``-realizing slopes of ``eta`` are among those of ``mu``,
    and ``i(eta_X, a) / i(mu_X, a)`` is finite over all enumerated ``a`` with
    its maximum reached (within ``gap``) on ``eta``'s realizing slopes.
    Raises :class:`AmbiguousAtDepth` when the verdict at ``depth // 2``
    disagrees with the one at ``depth``.
    """
    m_eta, m_mu = _as_measured(eta), _as_measured(mu)
    ev = _decide(X, m_eta, m_mu, depth, gap)
    if depth >= 2:
        coarse = _decide(X, m_eta, m_mu, depth // 2, gap)
        if coarse.holds != ev.holds:
            raise AmbiguousAtDepth(
                f"accumulation verdict flips between depth {depth // 2} and {depth}",
                depth=depth,
            )
    return ev
