"""Curated endpoint pairs with a known envelope shape, and charts that frame them.

``RATIONAL`` stretches the single curve of slope 1/0 the most by a wide
margin, so its envelope is two-dimensional. ``IRRATIONAL`` comes from a
point pair whose argmax slopes keep descending the Stern-Brocot tree; its
envelope is a curve.
"""

from __future__ import annotations

from dataclasses import dataclass

from .envelope import Chart
from .torus import TracePoint, point_from_xy


@dataclass(frozen=True)
class CuratedPair:
    name: str
    X: TracePoint
    Y: TracePoint
    chart: Chart

    def rect(self):
        c = self.chart
        return f"{c.x0!r},{c.x1!r},{c.y0!r},{c.y1!r}"


RATIONAL = CuratedPair(
    "rational",
    TracePoint(3.0, 3.0, 3.0),
    point_from_xy(5.0, 3.0, "smaller"),
    Chart(2.8, 5.5, 2.4, 3.6, 200, 200, "smaller"),
)

# (x, z, y) ordering puts both points on the smaller-root sheet of the chart.
IRRATIONAL = CuratedPair(
    "irrational",
    TracePoint(8.741185927877815, 2.843549292637295, 4.063727658631371),
    TracePoint(2.814223981294031, 8.240713557742033, 3.9386569527001845),
    Chart(2.5, 9.2, 2.5, 8.7, 200, 200, "smaller"),
)
