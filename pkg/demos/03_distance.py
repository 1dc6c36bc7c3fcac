#!/usr/bin/env python
# Length ratios, the asymmetric distance and the maximally stretched lamination.
#
#   python demos/03_distance.py

from thurston.metric import (
    additivity_defect, ratio_profile, stretch_lamination, thurston_distance,
)
from thurston.pairs import IRRATIONAL, RATIONAL
from thurston.torus import point_from_xy

X, Y = RATIONAL.X, RATIONAL.Y
for depth in (3, 6, 12, 24):
    est = thurston_distance(X, Y, depth)
    print(f"depth {depth:2d}: d(X,Y) = {est.value:.10f}  converged={est.converged}")

print("reverse direction:", thurston_distance(Y, X).value)

prof = ratio_profile(X, Y, 6)
top = sorted(zip(prof.ratio_array, prof.slopes), key=lambda t: -t[0])[:4]
for r, s in top:
    print(f"  ratio {r:.6f} on {s}")

lam = stretch_lamination(X, Y)
print("rational pair:", lam.kind, lam.slope, f"gap {lam.gap:.4f}")
lam = stretch_lamination(IRRATIONAL.X, IRRATIONAL.Y)
print("irrational pair:", lam.kind, [str(s) for s in lam.convergents])

# a point off the envelope breaks additivity
Z = point_from_xy(4, 3.2, "smaller")
print("additivity defect through Z:", additivity_defect(X, Z, Y))
