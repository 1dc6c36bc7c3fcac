import random

import pytest

from oracles import double_cover_orientable
from thurston.errors import FluxImbalance
from thurston.fixtures import fixture_suite, random_fixture
from thurston.traintrack import (
    attachments,
    check_switch_conditions,
    component_flux,
    cut,
    decompose_components,
    find_directed_path,
    isolated_is_incoming,
    straighten_lift,
    track_from_json,
    track_to_json,
)


@pytest.fixture(scope="module")
def suite():
    return fixture_suite(120, seed=5)


def test_fixture_sizes(suite):
    assert all(fx.n_branches <= 12 for fx in suite)
    assert any(fx.unbalanced is not None for fx in suite)
    assert any(not orientable for fx in suite for _, orientable in fx.blocks)
    assert any(fx.track.compact_branches for fx in suite)


def test_fixtures_reproducible():
    a = fixture_suite(5, seed=9)
    b = fixture_suite(5, seed=9)
    assert [track_to_json(f.track) for f in a] == [track_to_json(f.track) for f in b]
    assert [f.far for f in a] == [f.far for f in b]


def test_random_fixture_accepts_seed():
    fx = random_fixture(3)
    assert fx.track.isolated_branches


def test_components_match_generator_and_double_cover(suite):
    for fx in suite:
        d = fx.track
        comps = {frozenset(c.branches): c.orientable for c in decompose_components(d)}
        assert comps == dict(fx.blocks)
        switches = [(s.side_a, s.side_b) for s in d.track.switches]
        assert double_cover_orientable(switches, set(d.stump_branches)) == comps


def test_flux_matches_generator(suite):
    for fx in suite:
        d = fx.track
        got = sorted(
            component_flux(d, c, fx.far) for c in decompose_components(d) if c.orientable
        )
        assert got == sorted(fx.flux)
        assert all(a == b for a, b in got)


def test_canonical_orientation_is_deterministic(suite):
    for fx in suite[:30]:
        d = track_from_json(track_to_json(fx.track))
        a = [c.directions for c in decompose_components(fx.track)]
        b = [c.directions for c in decompose_components(d)]
        assert a == b


def test_directed_paths_exist_between_all_attachments(suite):
    for fx in suite[:40]:
        d = fx.track
        for c in decompose_components(d):
            if not c.orientable:
                continue
            atts = attachments(d, c)
            ins = [h for h in atts if isolated_is_incoming(d, c, h)]
            outs = [h for h in atts if not isolated_is_incoming(d, c, h)]
            for a in ins:
                for b in outs:
                    path = find_directed_path(d, c, a, b)
                    assert all(c.directions[br] == sign for br, sign in path.steps)


def test_round_trip_and_unbalanced(suite):
    for fx in suite:
        w = straighten_lift(fx.track, fx.far)
        assert check_switch_conditions(fx.track.track, w)
        assert cut(fx.track, w) == fx.far
        if fx.unbalanced is not None:
            with pytest.raises(FluxImbalance):
                straighten_lift(fx.track, fx.unbalanced)


def test_stump_cycles_are_switch_valid(suite):
    rng = random.Random(0)
    for fx in suite[:50]:
        w = straighten_lift(fx.track, fx.far)
        for s in fx.stump_cycles:
            full = s.restrict(fx.track.track.branches)
            assert check_switch_conditions(fx.track.track, full)
            assert all(fx.track.marks[b] == "STUMP" for b, v in s.items() if v)
            assert cut(fx.track, w + full.scaled(rng.randint(1, 4))) == fx.far
