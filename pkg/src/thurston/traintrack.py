"""Train tracks with exact rational weights, and the straightening lift.

A half-branch is a pair ``(branch, end)`` with ``end`` in ``{0, 1}``. Each
switch holds three half-branches split into two nonempty sides; smooth train
paths cross a switch from one side to the other.

A decorated track marks every branch STUMP, ISOLATED or COMPACT. ISOLATED
half-branches attach at switches whose other two slots are STUMP, on opposite
sides, so the stump runs smoothly through every attachment point.
``straighten_lift`` turns far weights (ISOLATED + COMPACT) into a full weight
system by routing each isolated leaf through the stump along train paths.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .errors import ContractViolation, FluxImbalance, InputError, NoPath

STUMP, ISOLATED, COMPACT = "STUMP", "ISOLATED", "COMPACT"
MARKS = (STUMP, ISOLATED, COMPACT)


def _other(side):
    return "B" if side == "A" else "A"


def as_fraction(value):
    """Exact rational from int, Fraction or ``"p/q"`` text; floats are refused."""
    if isinstance(value, bool):
        raise InputError(f"weight {value!r} is not a rational")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"cannot parse weight {value!r}") from exc
    raise InputError(f"weight {value!r} must be an int, Fraction or 'p/q' string")


@dataclass(frozen=True)
class Switch:
    side_a: tuple
    side_b: tuple

    def side(self, name):
        return self.side_a if name == "A" else self.side_b

    def slots(self):
        for h in self.side_a:
            yield h, "A"
        for h in self.side_b:
            yield h, "B"


class TrainTrack:
    """Trivalent branched graph; half-branches may be left unattached."""

    def __init__(self, branches, switches):
        self.branches = tuple(sorted(set(branches)))
        if len(self.branches) != len(list(branches)):
            raise InputError("duplicate branch identifiers")
        known = set(self.branches)
        sw = []
        self._slot = {}
        for k, (side_a, side_b) in enumerate(switches):
            side_a = tuple((str(b), int(e)) for b, e in side_a)
            side_b = tuple((str(b), int(e)) for b, e in side_b)
            if not side_a or not side_b:
                raise InputError(f"switch {k} has an empty side")
            if len(side_a) + len(side_b) != 3:
                raise InputError(f"switch {k} has {len(side_a) + len(side_b)} half-branches, not 3")
            s = Switch(side_a, side_b)
            for h, side in s.slots():
                if h[0] not in known:
                    raise InputError(f"switch {k} references unknown branch {h[0]!r}")
                if h[1] not in (0, 1):
                    raise InputError(f"half-branch {h} has end other than 0 or 1")
                if h in self._slot:
                    raise InputError(f"half-branch {h} appears in two switch slots")
                self._slot[h] = (k, side)
            sw.append(s)
        self.switches = tuple(sw)

    def slot(self, half):
        """``(switch index, side)`` of an attached half-branch, else ``None``."""
        return self._slot.get(tuple(half))

    def __repr__(self):
        return f"TrainTrack({len(self.branches)} branches, {len(self.switches)} switches)"


class WeightSystem:
    """Immutable map branch -> nonnegative Fraction."""

    __slots__ = ("_w",)

    def __init__(self, weights=None):
        w = {}
        for b, v in dict(weights or {}).items():
            f = as_fraction(v)
            if f < 0:
                raise InputError(f"weight on {b!r} is negative: {f}")
            w[str(b)] = f
        self._w = w

    def __getitem__(self, b):
        return self._w[b]

    def __contains__(self, b):
        return b in self._w

    def __iter__(self):
        return iter(sorted(self._w))

    def __len__(self):
        return len(self._w)

    def get(self, b, default=Fraction(0)):
        return self._w.get(b, default)

    def items(self):
        return sorted(self._w.items())

    def restrict(self, branches):
        return WeightSystem({b: self._w.get(b, Fraction(0)) for b in branches})

    def __add__(self, other):
        keys = set(self._w) | set(other._w)
        return WeightSystem({b: self.get(b) + other.get(b) for b in keys})

    def scaled(self, c):
        return WeightSystem({b: v * as_fraction(c) for b, v in self._w.items()})

    def __eq__(self, other):
        if not isinstance(other, WeightSystem):
            return NotImplemented
        return self._w == other._w

    def __hash__(self):
        return hash(tuple(self.items()))

    def to_json(self):
        return {b: str(v) for b, v in self.items()}

    def __repr__(self):
        inner = ", ".join(f"{b}: {v}" for b, v in self.items())
        return f"WeightSystem({{{inner}}})"


def check_switch_conditions(track, w):
    """Exact balance of both sides at every switch."""
    missing = [b for b in track.branches if b not in w]
    if missing:
        raise InputError(f"no weight for branches {missing}")
    for s in track.switches:
        if sum(w[b] for b, _ in s.side_a) != sum(w[b] for b, _ in s.side_b):
            return False
    return True


class DecoratedTrack:
    """A train track whose branches are marked STUMP, ISOLATED or COMPACT."""

    def __init__(self, track, marks):
        marks = {str(b): str(m).upper() for b, m in dict(marks).items()}
        if set(marks) != set(track.branches):
            extra = set(marks) ^ set(track.branches)
            raise InputError(f"marks must cover exactly the branches; mismatch on {sorted(extra)}")
        bad = {b: m for b, m in marks.items() if m not in MARKS}
        if bad:
            raise InputError(f"unknown marks {bad}")
        self.track = track
        self.marks = marks
        self._validate()

    def branches_marked(self, mark):
        return tuple(b for b in self.track.branches if self.marks[b] == mark)

    @property
    def stump_branches(self):
        return self.branches_marked(STUMP)

    @property
    def isolated_branches(self):
        return self.branches_marked(ISOLATED)

    @property
    def compact_branches(self):
        return self.branches_marked(COMPACT)

    def _validate(self):
        t = self.track
        for k, s in enumerate(t.switches):
            kinds = [self.marks[h[0]] for h, _ in s.slots()]
            if COMPACT in kinds and set(kinds) != {COMPACT}:
                raise InputError(f"switch {k} mixes COMPACT with other branches")
            n_iso = kinds.count(ISOLATED)
            if n_iso == 0:
                continue
            if n_iso > 1:
                raise InputError(f"switch {k} carries more than one ISOLATED half-branch")
            stump_sides = [side for h, side in s.slots() if self.marks[h[0]] == STUMP]
            if sorted(stump_sides) != ["A", "B"]:
                raise InputError(
                    f"switch {k}: the two STUMP half-branches of an attachment must "
                    "sit on opposite sides"
                )
        for b in self.stump_branches:
            for e in (0, 1):
                if t.slot((b, e)) is None:
                    raise InputError(f"STUMP half-branch {(b, e)} is not attached to a switch")
        for b in self.compact_branches:
            for e in (0, 1):
                if t.slot((b, e)) is None:
                    raise InputError(f"COMPACT half-branch {(b, e)} is not attached to a switch")

    def attached_isolated(self):
        """ISOLATED half-branches that sit at a switch, in sorted order."""
        out = []
        for b in self.isolated_branches:
            for e in (0, 1):
                if self.track.slot((b, e)) is not None:
                    out.append((b, e))
        return out

    def __repr__(self):
        return (
            f"DecoratedTrack(stump={list(self.stump_branches)}, "
            f"isolated={list(self.isolated_branches)}, compact={list(self.compact_branches)})"
        )


class FarWeights:
    """Weights on ISOLATED branches plus a weight system on the compact part."""

    def __init__(self, isolated, compact=None):
        self.isolated = isolated if isinstance(isolated, WeightSystem) else WeightSystem(isolated)
        compact = compact if compact is not None else {}
        self.compact = compact if isinstance(compact, WeightSystem) else WeightSystem(compact)

    def validate(self, d):
        if set(self.isolated) != set(d.isolated_branches):
            raise InputError(
                f"isolated weights must cover exactly {list(d.isolated_branches)}, "
                f"got {list(self.isolated)}"
            )
        if set(self.compact) != set(d.compact_branches):
            raise InputError(
                f"compact weights must cover exactly {list(d.compact_branches)}, "
                f"got {list(self.compact)}"
            )
        for k, s in enumerate(d.track.switches):
            if all(d.marks[h[0]] == COMPACT for h, _ in s.slots()):
                a = sum(self.compact[b] for b, _ in s.side_a)
                b_ = sum(self.compact[b] for b, _ in s.side_b)
                if a != b_:
                    raise InputError(f"compact weights violate the switch condition at switch {k}")

    def __eq__(self, other):
        if not isinstance(other, FarWeights):
            return NotImplemented
        return self.isolated == other.isolated and self.compact == other.compact

    def __repr__(self):
        return f"FarWeights(isolated={self.isolated!r}, compact={self.compact!r})"

    def to_json(self):
        return {"isolated": self.isolated.to_json(), "compact": self.compact.to_json()}


@dataclass(frozen=True)
class ThetaPoint:
    """A point of ``Cone x [0, inf)``: straightenable far weights and a scale."""

    far: FarWeights
    scale: Fraction

    @classmethod
    def make(cls, d, far, scale):
        scale = as_fraction(scale)
        if scale < 0:
            raise InputError(f"scale must be nonnegative, got {scale}")
        if not is_straightenable(d, far):
            raise InputError("far weights are not straightenable on this track")
        return cls(far, scale)


# --- stump components --------------------------------------------------------


@dataclass(frozen=True)
class OrientedComponent:
    index: int
    branches: tuple
    orientable: bool
    directions: dict | None = None  # branch -> +1 (end0 -> end1) or -1

    def incoming(self, half):
        """Does the stump half-branch carry flow into its switch?"""
        b, e = half
        d = self.directions[b]
        return (d == 1 and e == 1) or (d == -1 and e == 0)


def _stump_neighbours(d, half):
    """Other STUMP half-branches at the switch of ``half``, with same-side flag."""
    k, side = d.track.slot(half)
    out = []
    for h, s in d.track.switches[k].slots():
        if h != half and d.marks[h[0]] == STUMP:
            out.append((h, s == side))
    return out


def decompose_components(d):
    """Connected STUMP components with orientability and a canonical orientation.

    Directions spread breadth-first from the lowest branch of each component;
    a forced conflict makes the component non-orientable. Orientable
    components are then flipped, if needed, so that the lowest branch leaves
    its first sideB slot (or enters its end-0 slot when it has none on sideB).
    """
    stump = d.stump_branches
    seen = set()
    comps = []
    for root in stump:
        if root in seen:
            continue
        members = []
        dirs = {root: 1}
        ok = True
        queue = deque([root])
        seen.add(root)
        while queue:
            b = queue.popleft()
            members.append(b)
            for e in (0, 1):
                half = (b, e)
                # incoming status of this half under current direction
                inc = (dirs[b] == 1) == (e == 1)
                for (b2, e2), same_side in _stump_neighbours(d, half):
                    # same side => same incoming status; opposite => opposite
                    want_inc = inc if same_side else not inc
                    want_dir = 1 if want_inc == (e2 == 1) else -1
                    if b2 == b and e2 != e:
                        # both ends of one branch at one switch
                        if want_dir != dirs[b]:
                            ok = False
                        continue
                    if b2 in dirs:
                        if dirs[b2] != want_dir:
                            ok = False
                    else:
                        dirs[b2] = want_dir
                    if b2 not in seen:
                        seen.add(b2)
                        queue.append(b2)
        members = tuple(sorted(members))
        if ok:
            dirs = _canonical(d, members, dirs)
            comps.append(OrientedComponent(len(comps), members, True, dirs))
        else:
            comps.append(OrientedComponent(len(comps), members, False, None))
    return comps


def _canonical(d, members, dirs):
    low = members[0]
    for e in (0, 1):
        if d.track.slot((low, e))[1] == "B":
            # this end must be outgoing
            flip = (dirs[low] == 1) == (e == 1)
            break
    else:
        # end 0 must be incoming, i.e. direction -1
        flip = dirs[low] == 1
    if flip:
        dirs = {b: -v for b, v in dirs.items()}
    return {b: dirs[b] for b in members}


def component_of(d, components, half):
    """The stump component an attached ISOLATED half-branch touches."""
    slot = d.track.slot(half)
    if slot is None:
        raise InputError(f"half-branch {half} is not attached")
    k, _ = slot
    for h, _ in d.track.switches[k].slots():
        if d.marks[h[0]] == STUMP:
            for c in components:
                if h[0] in c.branches:
                    return c
    raise InputError(f"half-branch {half} is not attached to the stump")


def attachments(d, c):
    """Attached ISOLATED half-branches of component ``c``."""
    out = []
    for half in d.attached_isolated():
        k, _ = d.track.slot(half)
        if any(h[0] in c.branches for h, _ in d.track.switches[k].slots()):
            out.append(half)
    return out


def isolated_is_incoming(d, c, half):
    """Relative to ``c``'s orientation: does the leaf flow into the stump here?"""
    k, side = d.track.slot(half)
    for h, s in d.track.switches[k].slots():
        if s == side and d.marks[h[0]] == STUMP:
            return c.incoming(h)
    raise InputError(f"attachment switch {k} has no STUMP half-branch beside {half}")


def component_flux(d, c, f):
    """``(in_sum, out_sum)`` of isolated weight entering and leaving ``c``."""
    if not c.orientable:
        raise ContractViolation(f"component {c.index} is not orientable; flux is undefined")
    fin = Fraction(0)
    fout = Fraction(0)
    for half in attachments(d, c):
        if isolated_is_incoming(d, c, half):
            fin += f.isolated[half[0]]
        else:
            fout += f.isolated[half[0]]
    return fin, fout


def is_straightenable(d, f):
    f.validate(d)
    for c in decompose_components(d):
        if c.orientable:
            fin, fout = component_flux(d, c, f)
            if fin != fout:
                return False
    return True


# --- train paths -------------------------------------------------------------


@dataclass(frozen=True)
class TrainPath:
    steps: tuple  # ((branch, +1 | -1), ...)

    def counts(self):
        out = {}
        for b, _ in self.steps:
            out[b] = out.get(b, 0) + 1
        return out

    def __len__(self):
        return len(self.steps)


def _walk_back(prev, end):
    steps = []
    node = end
    while prev.get(node) is not None:
        node, step = prev[node]
        steps.append(step)
    return tuple(reversed(steps))


def _search(d, c, start, accept):
    """Shortest smooth path over states ``(switch, arrival side)``.

    Leaving a state crosses to the opposite side and follows a STUMP
    half-branch of ``c`` to its far end; ties break on branch identifier.
    """
    members = set(c.branches)
    parent = {start: None}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        if accept(state):
            return _walk_back(parent, state)
        k, side = state
        for b, e in sorted(
            h for h in d.track.switches[k].side(_other(side)) if h[0] in members
        ):
            step = (b, 1 if e == 0 else -1)
            if c.orientable and c.directions[b] != step[1]:
                continue
            far = d.track.slot((b, 1 - e))
            if far not in parent:
                parent[far] = (state, step)
                queue.append(far)
    return None


def find_directed_path(d, c, entry, exit):
    """Smooth directed path through ``c`` from an incoming to an outgoing attachment."""
    if not c.orientable:
        raise ContractViolation(f"component {c.index} is not orientable")
    for half, want in ((entry, True), (exit, False)):
        if half not in attachments(d, c):
            raise InputError(f"half-branch {half} is not attached to component {c.index}")
        if isolated_is_incoming(d, c, half) != want:
            raise InputError(
                f"half-branch {half} is {'outgoing' if want else 'incoming'} on "
                f"component {c.index}"
            )
    start = d.track.slot(entry)
    k_out, side_out = d.track.slot(exit)
    goal = (k_out, _other(side_out))
    if start == goal:
        return TrainPath(())
    steps = _search(d, c, start, lambda s: s == goal)
    if steps is None:
        raise NoPath(c.index, f"no train path from {entry} to {exit}")
    return TrainPath(steps)


def find_reversing_path(d, c, entry):
    """Path leaving ``entry`` into the stump and coming back out along it.

    Searched in the double cover: the walk must return to the entry switch
    arriving on the side opposite to ``entry``.
    """
    if c.orientable:
        raise ContractViolation(f"component {c.index} is orientable; no reversing path exists")
    if entry not in attachments(d, c):
        raise InputError(f"half-branch {entry} is not attached to component {c.index}")
    k, side = d.track.slot(entry)
    start = (k, side)
    goal = (k, _other(side))
    # goal differs from start, so any accepted state has at least one step
    steps = _search(d, c, start, lambda s: s == goal)
    if steps is None:
        raise NoPath(c.index, f"no reversing path from {entry}")
    return TrainPath(steps)


def _key(h):
    return tuple(h) if isinstance(h, list) else h


def pair_weights(in_list, out_list):
    """Northwest-corner transport plan between incoming and outgoing weights.

    Both lists are sorted by half-branch and laid end to end on a common
    interval; each pair receives the length of the overlap of its cells.
    """
    ins = sorted((_key(h), as_fraction(w)) for h, w in in_list)
    outs = sorted((_key(h), as_fraction(w)) for h, w in out_list)
    tin = sum((w for _, w in ins), Fraction(0))
    tout = sum((w for _, w in outs), Fraction(0))
    if tin != tout:
        raise FluxImbalance(None, tin, tout)
    plan = {}
    i = j = 0
    left_in = ins[0][1] if ins else Fraction(0)
    left_out = outs[0][1] if outs else Fraction(0)
    while i < len(ins) and j < len(outs):
        m = min(left_in, left_out)
        if m > 0:
            key = (ins[i][0], outs[j][0])
            plan[key] = plan.get(key, Fraction(0)) + m
        left_in -= m
        left_out -= m
        if left_in == 0:
            i += 1
            left_in = ins[i][1] if i < len(ins) else Fraction(0)
        if left_out == 0:
            j += 1
            left_out = outs[j][1] if j < len(outs) else Fraction(0)
    return plan


def straighten_lift(d, f):
    """Full weight system whose far part is ``f``.

    Non-orientable components: every attached leaf of weight ``w`` adds
    ``w/2`` per traversal of its reversing path. Orientable components: the
    incoming and outgoing leaves are matched by :func:`pair_weights` and each
    matched amount is pushed along a directed path.
    """
    f.validate(d)
    stump = {b: Fraction(0) for b in d.stump_branches}
    for c in decompose_components(d):
        atts = attachments(d, c)
        if not c.orientable:
            for half in atts:
                w = f.isolated[half[0]]
                if w == 0:
                    continue
                path = find_reversing_path(d, c, half)
                for b, n in path.counts().items():
                    stump[b] += w / 2 * n
            continue
        ins, outs = [], []
        for half in atts:
            (ins if isolated_is_incoming(d, c, half) else outs).append(
                (half, f.isolated[half[0]])
            )
        fin = sum((w for _, w in ins), Fraction(0))
        fout = sum((w for _, w in outs), Fraction(0))
        if fin != fout:
            raise FluxImbalance(c.index, fin, fout)
        for (hin, hout), w in sorted(pair_weights(ins, outs).items()):
            path = find_directed_path(d, c, hin, hout)
            for b, n in path.counts().items():
                stump[b] += w * n
    full = dict(stump)
    full.update(dict(f.isolated.items()))
    full.update(dict(f.compact.items()))
    return WeightSystem(full)


def cut(d, w):
    """Far part of a full weight system: its ISOLATED and COMPACT restrictions."""
    if not check_switch_conditions(d.track, w):
        raise InputError("weights violate the switch conditions")
    return FarWeights(w.restrict(d.isolated_branches), w.restrict(d.compact_branches))


def add_stump_weights(d, w, s, n):
    """``w + n * s`` for a switch-valid ``s`` carried by the stump."""
    n = as_fraction(n)
    if n < 0:
        raise InputError(f"n must be nonnegative, got {n}")
    off = [b for b, v in s.items() if v != 0 and d.marks.get(b) != STUMP]
    if off:
        raise InputError(f"stump weights are nonzero off the stump on {off}")
    s_full = s.restrict(d.track.branches)
    if not check_switch_conditions(d.track, s_full):
        raise InputError("stump weights violate the switch conditions")
    return w + s_full.scaled(n)


# --- JSON --------------------------------------------------------------------


def track_from_json(obj):
    """``TrainTrack`` or ``DecoratedTrack`` (when ``marks`` is present)."""
    try:
        branches = [str(b) for b in obj["branches"]]
        switches = [(s["sideA"], s["sideB"]) for s in obj["switches"]]
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed track JSON: {exc}") from exc
    track = TrainTrack(branches, switches)
    if "marks" in obj:
        return DecoratedTrack(track, obj["marks"])
    return track


def track_to_json(t):
    d = t if isinstance(t, DecoratedTrack) else None
    track = d.track if d else t
    obj = {
        "branches": list(track.branches),
        "switches": [
            {"sideA": [list(h) for h in s.side_a], "sideB": [list(h) for h in s.side_b]}
            for s in track.switches
        ],
    }
    if d:
        obj["marks"] = dict(sorted(d.marks.items()))
    return obj


def far_from_json(obj):
    try:
        return FarWeights(obj.get("isolated", {}), obj.get("compact", {}))
    except AttributeError as exc:
        raise InputError("far weights must be a JSON object") from exc


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
