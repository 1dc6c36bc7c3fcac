#!/usr/bin/env python
# Straighten far weights on a small decorated track, then cut them back off.
#
#   python demos/01_straighten.py

from fractions import Fraction

from thurston.errors import FluxImbalance
from thurston.traintrack import (
    ISOLATED, STUMP, DecoratedTrack, FarWeights, TrainTrack,
    WeightSystem, add_stump_weights, check_switch_conditions, component_flux, cut,
    decompose_components, straighten_lift,
)

# a stump circle u, l; b1 merges in at one switch, b2 splits off at the other
switches = [
    ([("l", 1), ("b1", 1)], [("u", 0)]),
    ([("u", 1)], [("l", 0), ("b2", 0)]),
]
marks = {"u": STUMP, "l": STUMP, "b1": ISOLATED, "b2": ISOLATED}
d = DecoratedTrack(TrainTrack(sorted(marks), switches), marks)

for c in decompose_components(d):
    print("stump component", sorted(c.branches), "orientable:", c.orientable)

far = FarWeights({"b1": Fraction(3, 2), "b2": Fraction(3, 2)})
w = straighten_lift(d, far)
print("lift:", {b: str(v) for b, v in w.items()})
print("switch conditions hold:", check_switch_conditions(d.track, w))
print("cut recovers far weights:", cut(d, w) == far)

# going once more around the circle changes nothing on the isolated branches
loop = {"u": 1, "l": 1}
w2 = add_stump_weights(d, w, WeightSystem(loop), Fraction(5))
print("after twisting:", {b: str(v) for b, v in w2.items()})
print("cut unchanged:", cut(d, w2) == cut(d, w))

# unbalanced flux has no lift
bad = FarWeights({"b1": 1, "b2": 2})
(c,) = [c for c in decompose_components(d) if c.orientable]
print("flux in/out:", component_flux(d, c, bad))
try:
    straighten_lift(d, bad)
except FluxImbalance as exc:
    print("refused:", exc)
