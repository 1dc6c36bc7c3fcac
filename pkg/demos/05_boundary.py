#!/usr/bin/env python
# Lipschitz constants toward boundary slopes and the accumulation test.
#
#   python demos/05_boundary.py

from thurston.boundary import (
    accumulation_criterion, lipschitz_estimate, normalize_rep, tree_lipschitz_constant,
)
from thurston.torus import MeasuredSlope, Slope, TracePoint

P = TracePoint(3, 3, 3)
eta = MeasuredSlope(Slope(1, 0))

for depth in (1, 2, 4, 8, 12):
    est = lipschitz_estimate(P, eta, depth)
    print(f"depth {depth:2d}: L = {est.value:.12f}  realized by {[str(a) for a in est.cluster]}")

print("doubling the weight doubles L:",
      tree_lipschitz_constant(P, eta.scaled(2)) == 2 * tree_lipschitz_constant(P, eta))

rep = normalize_rep(P, eta)
print("normalized weight:", rep.measured.weight)

for mu in (eta.scaled(3), MeasuredSlope(Slope(1, 1)), MeasuredSlope(Slope(0, 1))):
    ev = accumulation_criterion(P, eta, mu)
    print(f"mu = {mu.slope} weight {mu.weight}: holds={ev.holds}, "
          f"blocking {[str(a) for a in ev.blocking]}")
