#!/usr/bin/env python
# Sample two envelopes on a grid and compare their shapes.
# Takes a few seconds; set THURSTON_THREADS to use more cores.
#
#   python demos/04_envelope_shapes.py

from thurston.envelope import (
    classify_boundary, cone_witness, lamination_consistency, sample_envelope, shape_report,
)
from thurston.pairs import IRRATIONAL, RATIONAL

for pair in (RATIONAL, IRRATIONAL):
    s = sample_envelope(pair.X, pair.Y, pair.chart)
    c = classify_boundary(s)
    r = shape_report(s, c)
    print(f"{pair.name}: {s.n_members} member cells of {s.member.size}")
    print(f"  shape {r.shape}, width {r.width_cells:.1f} cells, dimension ~{r.dimension:.2f}")
    print("  labels", c.counts())
    for name, centroid, cells in r.corners:
        print(f"  corner {name:>4} at ({centroid[0]:.3f}, {centroid[1]:.3f}), {len(cells)} cells")

# every interior member sees the same lamination
s = sample_envelope(RATIONAL.X, RATIONAL.Y, RATIONAL.chart)
c = classify_boundary(s)
ok = lamination_consistency(s)
print(f"consistent cells: {sum(ok.values())}/{len(ok)}")

w = cone_witness(s, c, s.cell_Y)
print("cone witness for Y:", w)
