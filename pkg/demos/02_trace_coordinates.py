#!/usr/bin/env python
# Markov triples, slope traces and the mapping class action.
#
#   python demos/02_trace_coordinates.py

import numpy as np

from thurston.torus import (
    Slope, TracePoint, apply_slope_map, enumerate_slopes, length_of_slope,
    point_from_xy, trace_of_slope, vieta_move, vieta_slope_map,
)

P = TracePoint(3, 3, 3)  # the most symmetric point
print("x^2+y^2+z^2 - xyz =", P.x**2 + P.y**2 + P.z**2 - P.x * P.y * P.z)

S = enumerate_slopes(4)
print(len(S), "slopes up to depth 4")
for s in S[:8]:
    print(f"  {str(s):>5}  trace {trace_of_slope(P, s):8.3f}  length {length_of_slope(P, s):.4f}")

# two roots above the same (x, y)
for root in ("smaller", "larger"):
    Q = point_from_xy(5, 3, root)
    print(root, "root:", Q)

# a Vieta flip moves the point; the slope map moves the curves along with it
Q = point_from_xy(5, 3, "smaller")
M = vieta_slope_map("z")
err = max(
    abs(trace_of_slope(vieta_move(Q, "z"), s) - trace_of_slope(Q, apply_slope_map(M, s)))
    for s in enumerate_slopes(8)
)
print("equivariance error over depth 8:", err)

lengths = np.array([length_of_slope(Q, s) for s in enumerate_slopes(10)])
print("systole at depth 10:", lengths.min())
print("shortest slope:", enumerate_slopes(10)[int(lengths.argmin())])
print("check 2/3 on (3,3,3):", trace_of_slope(P, Slope(2, 3)))
