"""Sampling and classifying envelopes ``Env(X, Y)`` in a 2-D trace chart.

A point ``Z`` lies on some Thurston geodesic from ``X`` to ``Y`` exactly when
``d(X,Z) + d(Z,Y) = d(X,Y)``. The sampler evaluates that additivity defect on
a grid in the ``(x, y)`` plane, where ``z`` is the chosen root of the Markov
equation.

A one-dimensional envelope runs between grid nodes, where the defect has a
sharp V-shaped valley, so the node values alone miss it. Membership therefore
uses :func:`crossing_defect`, which locates valley floors between nodes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.spatial.distance import directed_hausdorff

from .errors import InputError, NoSuchPoint
from .metric import (
    DEFAULT_DEPTH,
    DEFAULT_GAP,
    cluster_mask,
    lamination_intersection_check,
    point_lengths,
    stretch_lamination,
)
from .torus import TracePoint, enumerate_slopes, markov_complete, slope_lengths

TOL_FLOOR = 1e-9

LBD, RBD, BD = "LBD", "RBD", "BD"
INTERIOR_ADJ = "INTERIOR-ADJ"
UNRESOLVED = "UNRESOLVED"

SEGMENT = "SEGMENT"
QUADRILATERAL = "QUADRILATERAL-LIKE"
OTHER = "OTHER"


def _cells(mask):
    """``(row, col)`` index pairs of a boolean mask as plain ints."""
    return [(int(j), int(i)) for j, i in np.argwhere(mask)]


def thread_count():
    """Worker cap from ``THURSTON_THREADS``, else the CPU count."""
    raw = os.environ.get("THURSTON_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise InputError(f"THURSTON_THREADS={raw!r} is not an integer") from None
    return os.cpu_count() or 1


@dataclass(frozen=True)
class Chart:
    """Rectangle ``[x0, x1] x [y0, y1]`` sampled at ``nx x ny`` nodes."""

    x0: float
    x1: float
    y0: float
    y1: float
    nx: int = 200
    ny: int = 200
    root: str = "smaller"

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise InputError("chart rectangle must have positive extent")
        if self.nx < 2 or self.ny < 2:
            raise InputError("chart needs at least 2 nodes per axis")
        if self.root not in ("larger", "smaller"):
            raise InputError(f"root must be 'larger' or 'smaller', got {self.root!r}")

    @classmethod
    def framing(cls, X, Y, res=200, margin=0.25, root="smaller"):
        """Square-resolution chart around ``X`` and ``Y`` with relative margin."""
        xs = (X.x, Y.x)
        ys = (X.y, Y.y)
        span = max(max(xs) - min(xs), max(ys) - min(ys))
        pad = margin * span
        return cls(min(xs) - pad, max(xs) + pad, min(ys) - pad, max(ys) + pad, res, res, root)

    @property
    def hx(self):
        return (self.x1 - self.x0) / (self.nx - 1)

    @property
    def hy(self):
        return (self.y1 - self.y0) / (self.ny - 1)

    def axes(self):
        return np.linspace(self.x0, self.x1, self.nx), np.linspace(self.y0, self.y1, self.ny)

    def nodes(self):
        """Grid arrays ``(x, y, z, valid)`` indexed ``[row=y, col=x]``."""
        ax, ay = self.axes()
        gx, gy = np.meshgrid(ax, ay, indexing="xy")
        disc = (gx * gy) ** 2 - 4.0 * (gx * gx + gy * gy)
        valid = (disc >= 0) & (gx > 2) & (gy > 2)
        s = np.sqrt(np.where(valid, disc, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.root == "larger":
                gz = 0.5 * (gx * gy + s)
            else:
                gz = 2.0 * (gx * gx + gy * gy) / (gx * gy + s)
        valid &= np.isfinite(gz) & (gz > 2)
        return gx, gy, np.where(valid, gz, np.nan), valid

    def point_at(self, x, y):
        return TracePoint(x, y, markov_complete(x, y, self.root))

    def cell_of(self, P):
        """Nearest node ``(row, col)`` of a point that lies in this chart."""
        i = round((P.x - self.x0) / self.hx)
        j = round((P.y - self.y0) / self.hy)
        if not (0 <= i < self.nx and 0 <= j < self.ny):
            raise InputError(f"point {P} lies outside the chart rectangle")
        try:
            z = markov_complete(P.x, P.y, self.root)
        except NoSuchPoint:
            raise InputError(f"point {P} is not in the chart domain") from None
        if abs(z - P.z) > 1e-6 * P.z:
            raise InputError(f"point {P} is on the other root sheet of this chart")
        return (j, i)

    def contains(self, P):
        try:
            self.cell_of(P)
        except InputError:
            return False
        return True


def _grid_lengths(gx, gy, gz, valid, slopes, threads=None):
    """Lengths at every valid node, shape ``(len(slopes), ny, nx)``; NaN elsewhere."""
    out = np.full((len(slopes),) + gx.shape, np.nan)
    rows = [r for r in range(gx.shape[0]) if valid[r].any()]
    if not rows:
        return out
    workers = threads or thread_count()
    chunks = np.array_split(np.array(rows), min(workers * 4, len(rows)))

    def work(chunk):
        for r in chunk:
            m = valid[r]
            out[:, r, m] = slope_lengths(gx[r, m], gy[r, m], gz[r, m], slopes)

    if workers == 1:
        for c in chunks:
            work(c)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, chunks))
    return out


def crossing_defect(node_defect):
    """Per-cell defect with valleys between nodes recovered.

    Along each axis, a node pair ``(b, c)`` entered downhill from both sides
    gets the secant lines through ``(a, b)`` and ``(c, d)`` intersected. When
    the crossing lies between ``b`` and ``c``, its value is credited to the
    nearer node. The result is the minimum of that and the node value.
    """
    D = np.where(np.isfinite(node_defect), node_defect, np.nan)
    out = D.copy()
    for view in (out, out.T):
        src = D if view is out else D.T
        a, b, c, d = src[:, :-3], src[:, 1:-2], src[:, 2:-1], src[:, 3:]
        with np.errstate(invalid="ignore", divide="ignore"):
            ok = (a > b) & (d > c)
            sl = b - a
            sr = d - c
            t = (c - sr - b) / (sl - sr)
            v = b + sl * t
            ok &= (t >= 0) & (t <= 1)
        left = ok & (t <= 0.5)
        right = ok & (t > 0.5)
        vb = view[:, 1:-2]
        vc = view[:, 2:-1]
        vb[left] = np.fmin(vb[left], v[left])
        vc[right] = np.fmin(vc[right], v[right])
    return np.where(np.isnan(out), np.inf, out)


@dataclass
class EnvelopeSample:
    X: TracePoint
    Y: TracePoint
    chart: Chart
    depth: int
    tol: float
    gx: np.ndarray = field(repr=False)
    gy: np.ndarray = field(repr=False)
    gz: np.ndarray = field(repr=False)
    valid: np.ndarray = field(repr=False)
    d_xz: np.ndarray = field(repr=False)
    d_zy: np.ndarray = field(repr=False)
    d_xy: float
    slack: float
    node_defect: np.ndarray = field(repr=False)
    defect: np.ndarray = field(repr=False)
    member: np.ndarray = field(repr=False)
    cell_X: tuple
    cell_Y: tuple

    def point(self, cell):
        if cell == self.cell_X:
            return self.X
        if cell == self.cell_Y:
            return self.Y
        j, i = cell
        if not self.valid[j, i]:
            raise InputError(f"cell {cell} is out of the chart domain")
        return TracePoint(self.gx[j, i], self.gy[j, i], self.gz[j, i])

    def member_cells(self):
        return _cells(self.member)

    @property
    def n_members(self):
        return int(self.member.sum())


def sample_envelope(X, Y, chart, tol=None, depth=DEFAULT_DEPTH, threads=None):
    """Grid membership of ``Env(X, Y)``.

    With ``tol=None`` the tolerance is three times the truncation slack of
    ``d(X, Y)`` over the last depth doubling, floored at ``TOL_FLOOR``. The
    cells nearest ``X`` and ``Y`` are evaluated at ``X`` and ``Y`` themselves.
    """
    if X == Y:
        raise InputError("envelope needs distinct endpoints")
    cell_X = chart.cell_of(X)
    cell_Y = chart.cell_of(Y)
    if cell_X == cell_Y:
        raise InputError("X and Y fall in the same chart cell; refine the chart")
    S = tuple(enumerate_slopes(depth))
    n_half = len(enumerate_slopes(max(1, depth // 2)))

    gx, gy, gz, valid = chart.nodes()
    for (j, i), P in ((cell_X, X), (cell_Y, Y)):
        gx[j, i], gy[j, i], gz[j, i] = P.as_tuple()
        valid[j, i] = True
    LZ = _grid_lengths(gx, gy, gz, valid, S, threads)
    lx = point_lengths(X, S)[:, None, None]
    ly = point_lengths(Y, S)[:, None, None]
    r_xy = ly[:, 0, 0] / lx[:, 0, 0]
    d_xy = math.log(r_xy.max())
    if d_xy <= 0:
        raise InputError("d(X, Y) must be positive")
    slack = d_xy - math.log(r_xy[:n_half].max())
    if tol is None:
        tol = max(TOL_FLOOR, 3.0 * slack)
    with np.errstate(invalid="ignore"):
        d_xz = np.log(np.nanmax(LZ / lx, axis=0, initial=-np.inf, where=np.isfinite(LZ)))
        d_zy = np.log(np.nanmax(ly / LZ, axis=0, initial=-np.inf, where=np.isfinite(LZ)))
    d_xz[~valid] = np.nan
    d_zy[~valid] = np.nan
    # exact endpoint values
    d_xz[cell_X], d_zy[cell_X] = 0.0, d_xy
    d_xz[cell_Y], d_zy[cell_Y] = d_xy, 0.0
    node_defect = d_xz + d_zy - d_xy
    node_defect[~valid] = np.inf
    defect = crossing_defect(node_defect)
    member = valid & (defect <= tol)
    return EnvelopeSample(
        X, Y, chart, depth, float(tol), gx, gy, gz, valid, d_xz, d_zy, d_xy, slack,
        node_defect, defect, member, cell_X, cell_Y,
    )


# --- boundary classification -------------------------------------------------


@dataclass
class BoundaryClassification:
    labels: dict  # cell -> label
    evidence: dict  # cell -> (extra slopes toward X, extra slopes toward Y)
    base_cluster: frozenset
    gap: float

    def cells(self, label):
        return [c for c, lab in self.labels.items() if lab == label]

    def counts(self):
        out = {}
        for lab in self.labels.values():
            out[lab] = out.get(lab, 0) + 1
        return out


def boundary_cells(sample):
    """Member cells with a 4-neighbour that is not a member (grid edge counts)."""
    m = np.pad(sample.member, 1, constant_values=False)
    interior = m[1:-1, 1:-1] & m[:-2, 1:-1] & m[2:, 1:-1] & m[1:-1, :-2] & m[1:-1, 2:]
    edge = sample.member & ~interior
    return _cells(edge)


def cell_evidence(sample, cells, depth=None, gap=DEFAULT_GAP):
    """Extra near-max slopes of ``(X,Z)`` and ``(Z,Y)`` beyond ``(X,Y)``'s cluster."""
    depth = depth or sample.depth
    S = tuple(enumerate_slopes(depth))
    lx = point_lengths(sample.X, S)
    ly = point_lengths(sample.Y, S)
    base = frozenset(s for s, k in zip(S, cluster_mask(ly / lx, gap)) if k)
    if not cells:
        return base, {}
    pts = [sample.point(c) for c in cells]
    x, y, z = (np.array([P.as_tuple()[k] for P in pts]) for k in range(3))
    LZ = slope_lengths(x, y, z, S)
    m_xz = cluster_mask(LZ / lx[:, None], gap)
    m_zy = cluster_mask(ly[:, None] / LZ, gap)
    out = {}
    for n, c in enumerate(cells):
        c_xz = frozenset(s for s, k in zip(S, m_xz[:, n]) if k)
        c_zy = frozenset(s for s, k in zip(S, m_zy[:, n]) if k)
        out[c] = (c_xz, c_zy)
    return base, out


def _label(base, c_xz, c_zy):
    if not (base <= c_xz and base <= c_zy):
        return UNRESOLVED
    left = bool(c_xz - base)
    right = bool(c_zy - base)
    if left and right:
        return BD
    if right:
        return RBD
    if left:
        return LBD
    return INTERIOR_ADJ


def classify_boundary(sample, depth=None, gap=DEFAULT_GAP):
    """Label boundary member cells by one-sided extendability evidence.

    A cell is RBD when ``(Z, Y)`` has a near-max slope beyond ``(X, Y)``'s
    cluster, LBD when ``(X, Z)`` does, BD when both. Cells whose clusters do
    not contain ``(X, Y)``'s cluster are UNRESOLVED.
    """
    cells = boundary_cells(sample)
    base, ev = cell_evidence(sample, cells, depth, gap)
    labels = {}
    evidence = {}
    for c in cells:
        c_xz, c_zy = ev[c]
        labels[c] = _label(base, c_xz, c_zy)
        evidence[c] = (tuple(sorted(c_xz - base)), tuple(sorted(c_zy - base)))
    return BoundaryClassification(labels, evidence, base, gap)


def label_of(sample, cell, depth=None, gap=DEFAULT_GAP):
    """Evidence label for any member cell, boundary or not."""
    base, ev = cell_evidence(sample, [cell], depth, gap)
    return _label(base, *ev[cell])


# --- shape report ------------------------------------------------------------


@dataclass
class EnvelopeReport:
    shape: str
    corners: list  # [(name, centroid (x, y), cells)]
    dimension: float
    width_cells: float
    chart_diameter: float
    thurston_radius: float
    diagnostics: list = field(default_factory=list)

    @property
    def estimated_dimension(self):
        return int(round(self.dimension)) if np.isfinite(self.dimension) else None

    @property
    def cone_dimension(self):
        d = self.estimated_dimension
        return None if d is None else d - 1

    @property
    def bd_clusters(self):
        return [c for c in self.corners if c[0].startswith("BD")]


def membership_width(member):
    """Thickness in cells: ``2 * max inscribed distance - 1``."""
    if not member.any():
        return 0.0
    dist = ndimage.distance_transform_edt(np.pad(member, 1, constant_values=False))
    return float(2.0 * dist.max() - 1.0)


def box_dimension(member, sizes=None):
    """Box-counting dimension of the member set over coarsened grids."""
    ny, nx = member.shape
    if sizes is None:
        top = min(nx, ny) // 4
        sizes = [s for s in (2, 4, 8, 16, 32) if s <= top]
    if len(sizes) < 2 or not member.any():
        return float("nan")
    counts = []
    for s in sizes:
        py, px = (-ny) % s, (-nx) % s
        m = np.pad(member, ((0, py), (0, px)), constant_values=False)
        boxes = m.reshape(m.shape[0] // s, s, m.shape[1] // s, s).any(axis=(1, 3))
        counts.append(boxes.sum())
    slope = np.polyfit(np.log(1.0 / np.array(sizes)), np.log(counts), 1)[0]
    return float(slope)


def _components(cells, shape):
    mask = np.zeros(shape, dtype=bool)
    for c in cells:
        mask[c] = True
    lab, n = ndimage.label(mask, structure=np.ones((3, 3)))
    return [_cells(lab == k) for k in range(1, n + 1)]


def _corner_cluster_near(cells, target, radius):
    return [c for c in cells if max(abs(c[0] - target[0]), abs(c[1] - target[1])) <= radius]


def shape_report(sample, classification, width_tol=2.0, corner_radius=3):
    """Segment / quadrilateral / other, with corner clusters and a dimension estimate."""
    diag = []
    ny, nx = sample.member.shape
    members = np.argwhere(sample.member)
    if len(members):
        pts = np.column_stack(
            [sample.gx[sample.member], sample.gy[sample.member]]
        )
        span = pts.max(axis=0) - pts.min(axis=0)
        chart_diam = float(np.hypot(*span))
        radius = float(np.nanmax(sample.d_xz[sample.member]))
    else:
        chart_diam, radius = 0.0, 0.0
    width = membership_width(sample.member)
    dim = box_dimension(sample.member)
    if min(nx, ny) < 8:
        diag.append("resolution too coarse for shape analysis")
        return EnvelopeReport(OTHER, [], dim, width, chart_diam, radius, diag)

    corners = [
        ("X", (sample.X.x, sample.X.y), [sample.cell_X]),
        ("Y", (sample.Y.x, sample.Y.y), [sample.cell_Y]),
    ]
    if width <= width_tol:
        return EnvelopeReport(SEGMENT, corners, dim, width, chart_diam, radius, diag)

    # BD cells next to X or Y belong to those corners, not to new ones.
    bd = [
        c
        for c in classification.cells(BD)
        if not _corner_cluster_near([c], sample.cell_X, corner_radius)
        and not _corner_cluster_near([c], sample.cell_Y, corner_radius)
    ]
    clusters = _components(bd, sample.member.shape)
    for k, cl in enumerate(clusters):
        cy = float(np.mean([sample.gy[c] for c in cl]))
        cx = float(np.mean([sample.gx[c] for c in cl]))
        corners.append((f"BD{k + 1}", (cx, cy), cl))
    n_unres = len(classification.cells(UNRESOLVED))
    if n_unres:
        diag.append(f"{n_unres} unresolved boundary cells excluded from corners")
    if len(clusters) != 2:
        diag.append(f"found {len(clusters)} BD corner clusters, expected 2")
        return EnvelopeReport(OTHER, corners, dim, width, chart_diam, radius, diag)

    order = _cyclic_corner_order(sample, corners)
    if order is None or not _alternates(order):
        diag.append(f"corner cyclic order {order} does not separate X from Y")
        return EnvelopeReport(OTHER, corners, dim, width, chart_diam, radius, diag)
    return EnvelopeReport(QUADRILATERAL, corners, dim, width, chart_diam, radius, diag)


def _cyclic_corner_order(sample, corners):
    """Corner names in angular order around the member centroid."""
    m = sample.member
    cy = np.mean(np.argwhere(m)[:, 0])
    cx = np.mean(np.argwhere(m)[:, 1])
    angles = []
    for name, _, cells in corners:
        ay = np.mean([c[0] for c in cells]) - cy
        ax = np.mean([c[1] for c in cells]) - cx
        if ax == 0 and ay == 0:
            return None
        angles.append((math.atan2(ay, ax), name))
    return [name for _, name in sorted(angles)]


def _alternates(order):
    if len(order) != 4:
        return False
    ix, iy = order.index("X"), order.index("Y")
    return abs(ix - iy) == 2


# --- cone witnesses, level sets, continuity -----------------------------------


@dataclass(frozen=True)
class ConeWitness:
    cell: tuple
    defect: float


def cone_witness(sample, classification, cell, tol=None):
    """An RBD cell ``R`` with ``Z`` on a geodesic from ``X`` to ``R``.

    Returns the RBD cell minimizing ``|d(X,Z) + d(Z,R) - d(X,R)|`` when that
    value is within ``tol`` (default: the sample tolerance), else ``None``.
    """
    if not sample.member[cell]:
        raise InputError(f"cell {cell} is not a member")
    tol = sample.tol if tol is None else tol
    rbd = sorted(classification.cells(RBD))
    if not rbd:
        return None
    S = tuple(enumerate_slopes(sample.depth))
    lz = point_lengths(sample.point(cell), S)
    pts = [sample.point(c) for c in rbd]
    x, y, z = (np.array([P.as_tuple()[k] for P in pts]) for k in range(3))
    LR = slope_lengths(x, y, z, S)
    d_zr = np.log((LR / lz[:, None]).max(axis=0))
    d_xr = np.array([sample.d_xz[c] for c in rbd])
    defects = np.abs(sample.d_xz[cell] + d_zr - d_xr)
    k = int(np.argmin(defects))
    if defects[k] <= tol:
        return ConeWitness(rbd[k], float(defects[k]))
    return None


@dataclass(frozen=True)
class LevelSet:
    t: float
    cells: tuple
    n_components: int

    @property
    def connected(self):
        return self.n_components == 1


def level_step(sample):
    """Largest change of ``d(X, .)`` between 4-adjacent member cells."""
    d = np.where(sample.member, sample.d_xz, np.nan)
    steps = [np.abs(np.diff(d, axis=a)) for a in (0, 1)]
    return float(max(np.nanmax(s) if np.isfinite(s).any() else 0.0 for s in steps))


def level_set(sample, t, tol):
    """Member cells with ``|d(X,Z) - t d(X,Y)| <= tol`` and their 8-connectivity."""
    if not 0.0 <= t <= 1.0:
        raise InputError(f"t must lie in [0, 1], got {t}")
    with np.errstate(invalid="ignore"):
        mask = sample.member & (np.abs(sample.d_xz - t * sample.d_xy) <= tol)
    _, n = ndimage.label(mask, structure=np.ones((3, 3)))
    return LevelSet(t, tuple(_cells(mask)), int(n))


def member_points(sample):
    return np.column_stack([sample.gx[sample.member], sample.gy[sample.member]])


def hausdorff(a, b):
    """Symmetric Hausdorff distance between two point clouds (chart units)."""
    if len(a) == 0 or len(b) == 0:
        return float("inf")
    return max(directed_hausdorff(a, b)[0], directed_hausdorff(b, a)[0])


@dataclass(frozen=True)
class ProbeResult:
    delta: float
    moved: str
    hausdorff: float | None
    note: str = ""


def _shift(chart, P, delta):
    return chart.point_at(P.x + delta, P.y)


def continuity_probe(X, Y, chart, deltas, moved="X", depth=DEFAULT_DEPTH, tol=None):
    """Hausdorff distance between ``Env(X, Y)`` and the envelope with a shifted endpoint.

    ``moved`` is ``"X"``, ``"Y"`` or ``"both"``; shifts are along the chart's
    x axis. The baseline tolerance is reused for every resample.
    """
    if moved not in ("X", "Y", "both"):
        raise InputError(f"moved must be X, Y or both, got {moved!r}")
    base = sample_envelope(X, Y, chart, tol, depth)
    ref = member_points(base)
    results = []
    for delta in deltas:
        try:
            X2 = _shift(chart, X, delta) if moved in ("X", "both") else X
            Y2 = _shift(chart, Y, delta) if moved in ("Y", "both") else Y
            if delta == 0:
                X2, Y2 = X, Y
            s = sample_envelope(X2, Y2, chart, base.tol, depth)
        except (NoSuchPoint, InputError) as exc:
            results.append(ProbeResult(delta, moved, None, f"skipped: {exc}"))
            continue
        results.append(ProbeResult(delta, moved, hausdorff(ref, member_points(s))))
    return results


def lamination_consistency(sample, cells=None, gap=DEFAULT_GAP):
    """Vectorized lamination intersection check over member cells.

    Rational pairs compare cluster sets: ``cluster(X,Z) & cluster(Z,Y)`` must
    equal ``cluster(X,Y)``. Irrational pairs defer to the scalar check, one
    cell at a time. Returns ``{cell: bool}``; endpoint cells are skipped.
    """
    if cells is None:
        cells = sample.member_cells()
    cells = [c for c in cells if c not in (sample.cell_X, sample.cell_Y)]
    est = stretch_lamination(sample.X, sample.Y, sample.depth)
    if not est.is_rational:
        return {
            c: lamination_intersection_check(
                sample.X, sample.point(c), sample.Y, sample.depth, gap
            )
            for c in cells
        }
    base, ev = cell_evidence(sample, cells, gap=gap)
    return {c: (ev[c][0] & ev[c][1]) == base for c in cells}


GRID_COLUMNS = ("x", "y", "z", "defect", "member", "label")


def grid_rows(sample, classification=None):
    """Rows for the grid CSV, row-major from the lower-left corner."""
    labels = classification.labels if classification is not None else {}
    ny, nx = sample.member.shape
    for j in range(ny):
        for i in range(nx):
            c = (j, i)
            if not sample.valid[c]:
                label = "OUT"
            elif c in labels:
                label = labels[c]
            else:
                label = "MEMBER" if sample.member[c] else "NONMEMBER"
            yield (
                float(sample.gx[c]),
                float(sample.gy[c]),
                float(sample.gz[c]),
                float(sample.defect[c]),
                int(sample.member[c]),
                label,
            )
