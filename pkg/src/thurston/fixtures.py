"""Random decorated train tracks with known structure.

Tracks are glued from three recurrent stump blocks (a circle, a theta graph
and a non-orientable dumbbell: two one-switch loops joined by a bar), then
subdivided to create attachment switches for isolated branches. An optional
compact theta graph rides along. Because the generator builds every block
itself, it knows which stump components are orientable, which way the flow
runs through each attachment, and a few closed train paths on the stump.
Tests use that knowledge as an oracle independent of the library's own
component analysis.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .traintrack import (
    COMPACT,
    ISOLATED,
    STUMP,
    DecoratedTrack,
    FarWeights,
    TrainTrack,
    WeightSystem,
)


@dataclass
class Block:
    kind: str
    orientable: bool
    branches: list = field(default_factory=list)
    cycles: list = field(default_factory=list)  # closed train paths as {branch: count}
    slots: list = field(default_factory=list)  # slot ids attached to this block


@dataclass
class TrackFixture:
    track: DecoratedTrack
    far: FarWeights
    unbalanced: FarWeights | None
    blocks: list  # [(frozenset of stump branches, orientable)]
    flux: list  # per orientable block: (in_sum, out_sum) under the balanced weights
    stump_cycles: list  # WeightSystems carried by the stump, switch-valid

    @property
    def n_branches(self):
        return len(self.track.track.branches)


class _Builder:
    def __init__(self, rng):
        self.rng = rng
        self.n = 0
        self.marks = {}
        self.switches = []  # [sideA list, sideB list]
        self.flow = {}  # stump branch -> +1 / -1 / None
        self.blocks = []
        self.slot_info = {}  # slot id -> (block index, incoming flag or None, balancer tag)
        self.n_slots = 0

    def new(self, mark):
        name = f"t{self.n}"
        self.n += 1
        self.marks[name] = mark
        return name

    def new_slot(self, block, incoming, tag=None):
        sid = ("SLOT", self.n_slots)
        self.n_slots += 1
        self.slot_info[sid] = (block, incoming, tag)
        self.blocks[block].slots.append(sid)
        return sid

    def add_switch(self, side_a, side_b):
        if self.rng.random() < 0.5:
            side_a, side_b = side_b, side_a
        self.switches.append([list(side_a), list(side_b)])

    def find(self, half):
        for sw in self.switches:
            for side in sw:
                if half in side:
                    return side
        raise KeyError(half)

    # -- blocks --

    def circle(self):
        bi = len(self.blocks)
        self.blocks.append(Block("circle", True))
        c = self.new(STUMP)
        self.flow[c] = 1
        self.blocks[bi].branches.append(c)
        self.blocks[bi].cycles.append({c: 1})
        incoming = self.rng.random() < 0.5
        slot = self.new_slot(bi, incoming)
        if incoming:
            self.add_switch([(c, 1), slot], [(c, 0)])
        else:
            self.add_switch([(c, 1)], [(c, 0), slot])
        return bi

    def theta(self, mark=STUMP):
        bi = len(self.blocks)
        self.blocks.append(Block("theta", True))
        a, b, c = (self.new(mark) for _ in range(3))
        self.add_switch([(a, 0)], [(b, 0), (c, 0)])
        self.add_switch([(a, 1)], [(b, 1), (c, 1)])
        self.flow.update({a: -1, b: 1, c: 1})
        self.blocks[bi].branches += [a, b, c]
        self.blocks[bi].cycles += [{a: 1, b: 1}, {a: 1, c: 1}]
        return bi

    def dumbbell(self):
        bi = len(self.blocks)
        self.blocks.append(Block("dumbbell", False))
        x, p, q = (self.new(STUMP) for _ in range(3))
        self.add_switch([(x, 0)], [(p, 0), (p, 1)])
        self.add_switch([(x, 1)], [(q, 0), (q, 1)])
        self.flow.update({x: None, p: None, q: None})
        self.blocks[bi].branches += [x, p, q]
        self.blocks[bi].cycles.append({x: 2, p: 1, q: 1})
        return bi

    def subdivide(self, bi, incoming=None, tag=None):
        """Split a branch of block ``bi`` and hang a new slot on the split point.

        ``incoming`` forces the flow direction of the slot on orientable
        blocks; ``None`` picks a side at random.
        """
        blk = self.blocks[bi]
        b = self.rng.choice(blk.branches)
        b2 = self.new(STUMP)
        side = self.find((b, 1))
        side[side.index((b, 1))] = (b2, 1)
        fl = self.flow[b]
        self.flow[b2] = fl
        if incoming is None or fl is None:
            with_b = self.rng.random() < 0.5
        else:
            # flow +1 arrives through b.1; flow -1 arrives through b2.0
            with_b = incoming == (fl == 1)
        inc = None if fl is None else (with_b == (fl == 1))
        slot = self.new_slot(bi, inc, tag)
        if with_b:
            self.add_switch([(b, 1), slot], [(b2, 0)])
        else:
            self.add_switch([(b, 1)], [(b2, 0), slot])
        blk.branches.append(b2)
        for cyc in blk.cycles:
            if b in cyc:
                cyc[b2] = cyc[b]


def _rand_weight(rng):
    if rng.random() < 0.1:
        return Fraction(0)
    return Fraction(rng.randint(1, 9), rng.choice((1, 1, 2, 3)))


def random_fixture(rng=None, max_branches=12, max_tries=200):
    """A random :class:`TrackFixture` with at most ``max_branches`` branches."""
    rng = rng if isinstance(rng, random.Random) else random.Random(rng)
    for _ in range(max_tries):
        fx = _attempt(rng)
        if fx is not None and fx.n_branches <= max_branches:
            return fx
    raise RuntimeError("could not build a fixture within the branch budget")


def _attempt(rng):
    bld = _Builder(rng)
    kinds = rng.choice(
        [["circle"], ["theta"], ["dumbbell"], ["circle", "dumbbell"], ["circle", "circle"],
         ["theta", "dumbbell"]]
    )
    for kind in kinds:
        bi = getattr(bld, kind)()
        extra = rng.randint(0, 2 if kind == "dumbbell" else 1)
        for _ in range(extra):
            bld.subdivide(bi)
        if bld.blocks[bi].orientable:
            bld.subdivide(bi, incoming=True, tag="bal_in")
            bld.subdivide(bi, incoming=False, tag="bal_out")
    compact = []
    if rng.random() < 0.3:
        ci = bld.theta(COMPACT)
        compact = bld.blocks.pop(ci).branches

    # isolated branches: balancers hang free, the rest pair up at random
    slots = [s for s, (_, _, tag) in bld.slot_info.items() if tag is None]
    rng.shuffle(slots)
    iso_ends = {}  # slot -> (iso branch, end)
    balancers = {}  # (block, tag) -> iso branch
    while slots:
        iso = bld.new(ISOLATED)
        take = 2 if len(slots) >= 2 and rng.random() < 0.5 else 1
        ends = [0, 1] if rng.random() < 0.5 else [1, 0]
        for e in ends[:take]:
            iso_ends[slots.pop()] = (iso, e)
    for s, (bi, _, tag) in bld.slot_info.items():
        if tag is not None:
            iso = bld.new(ISOLATED)
            iso_ends[s] = (iso, rng.randint(0, 1))
            balancers[(bi, tag)] = iso
    for sw in bld.switches:
        for side in sw:
            for k, h in enumerate(side):
                if h in iso_ends:
                    side[k] = iso_ends[h]

    iso_names = [b for b, m in bld.marks.items() if m == ISOLATED]
    weights = {b: _rand_weight(rng) for b in iso_names}
    flux = []
    for bi, blk in enumerate(bld.blocks):
        if not blk.orientable:
            continue
        fin = fout = Fraction(0)
        for s in blk.slots:
            _, inc, tag = bld.slot_info[s]
            if tag is not None:
                continue
            w = weights[iso_ends[s][0]]
            if inc:
                fin += w
            else:
                fout += w
        r = _rand_weight(rng)
        bal_in, bal_out = r, fin + r - fout
        if bal_out < 0:
            bal_in, bal_out = bal_in - bal_out, Fraction(0)
        weights[balancers[(bi, "bal_in")]] = bal_in
        weights[balancers[(bi, "bal_out")]] = bal_out
        flux.append((bi, fin + bal_in, fout + bal_out))

    cw = {}
    if compact:
        a, b, c = compact
        cw = {b: _rand_weight(rng), c: _rand_weight(rng)}
        cw[a] = cw[b] + cw[c]

    # cosmetic randomization: flip branch ends and rename
    flips = {b for b in bld.marks if rng.random() < 0.3}
    names = list(bld.marks)
    labels = [f"b{k:02d}" for k in range(len(names))]
    rng.shuffle(labels)
    rename = dict(zip(names, labels))

    def fix(h):
        b, e = h
        return (rename[b], 1 - e if b in flips else e)

    switches = [([fix(h) for h in sa], [fix(h) for h in sb]) for sa, sb in bld.switches]
    track = TrainTrack([rename[b] for b in names], switches)
    d = DecoratedTrack(track, {rename[b]: m for b, m in bld.marks.items()})

    far = FarWeights(
        {rename[b]: w for b, w in weights.items()}, {rename[b]: w for b, w in cw.items()}
    )
    unbalanced = None
    if flux:
        bi = rng.choice([f[0] for f in flux])
        iso = rename[balancers[(bi, "bal_out")]]
        bumped = dict(far.isolated.items())
        bumped[iso] += Fraction(rng.randint(1, 5), rng.choice((1, 2)))
        unbalanced = FarWeights(bumped, far.compact)
    blocks = [
        (frozenset(rename[b] for b in blk.branches), blk.orientable) for blk in bld.blocks
    ]
    cycles = [
        WeightSystem({rename[b]: n for b, n in cyc.items()})
        for blk in bld.blocks
        for cyc in blk.cycles
    ]
    return TrackFixture(
        d, far, unbalanced, blocks, [(f[1], f[2]) for f in flux], cycles
    )


def fixture_suite(n=100, seed=0, max_branches=12):
    """``n`` reproducible fixtures."""
    rng = random.Random(seed)
    return [random_fixture(rng, max_branches) for _ in range(n)]
