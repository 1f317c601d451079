import pytest
from conftest import random_walk

from realdessins.classify import closure
from realdessins.core import boundary_profile, canonical_code, degree, validate
from realdessins.errors import PatternMismatch
from realdessins.moves import (
    ELEMENTARY_KINDS,
    INVERSE,
    MoveSite,
    apply,
    applicable_moves,
    bridge_free_normalize,
    bridges,
    check_conservation,
    equivalent,
    inverse_site,
    is_peripheral,
    peripheral_normalize,
    read_script,
    replay,
    successors,
    write_script,
)


def _first(d, kind):
    return next((m, r) for m, r in successors(d) if m.kind == kind)


def _with_site(d, kind, pred=lambda d: True):
    """A dessin elementarily equivalent to ``d`` with a site of ``kind``."""
    for e in closure(d, ELEMENTARY_KINDS, 300, 4):
        if pred(e) and any(m.kind == kind for m, _ in successors(e)):
            return e
    raise AssertionError(f"no {kind} site near the fixture")


def _essential_census(d):
    return {k: v for k, v in d.census().items() if not k.endswith("mono")}


def test_every_listed_site_applies(cubics):
    for d in cubics.values():
        for m in applicable_moves(d):
            res = apply(d, m)
            assert validate(res) == []
            assert check_conservation(d, m, res) == []


def test_inverse_sites_restore_the_class(cubics, rng):
    for d in cubics.values():
        _, trail = random_walk(d, 6, rng)
        before = d
        for m, after in trail:
            back = inverse_site(before, after)
            assert back is not None and back.kind == INVERSE[m.kind]
            assert canonical_code(apply(after, back)) == canonical_code(before)
            before = after


def test_create_zigzag_is_weak_only(cubics):
    d = _with_site(cubics["I1"], "create_zigzag")
    m, z = _first(d, "create_zigzag")
    assert boundary_profile(z).zigzags == boundary_profile(d).zigzags + 1
    no = equivalent(d, z, allow_weak=False)
    assert no.verdict == "no" and no.invariant == "zigzags"
    yes = equivalent(d, z, allow_weak=True)
    assert yes.verdict == "yes"
    assert canonical_code(replay(d, yes.moves)) == canonical_code(z)


def test_types_are_weakly_separated(cubics):
    res = equivalent(cubics["I1"], cubics["II1"], allow_weak=True)
    assert res.verdict == "no" and res.invariant == "type"


def test_bridges_are_destroyed(cubics):
    d = max((r for m, r in successors(cubics["II2"]) if m.kind == "create_bridge"),
            key=lambda r: len(bridges(r)))
    assert len(bridges(d)) >= 2
    assert any(m.kind == "destroy_bridge" for m in applicable_moves(d))
    flat, witness = bridge_free_normalize(d)
    assert bridges(flat) == []
    assert _essential_census(flat) == _essential_census(d)
    assert all(m.kind == "destroy_bridge" for m in witness)
    assert canonical_code(replay(d, witness)) == canonical_code(flat)


def test_bridge_free_is_a_fixed_point(cubics):
    for d in cubics.values():
        if not bridges(d):
            flat, witness = bridge_free_normalize(d)
            assert witness == [] and flat is d


def test_peripheral_normalize(cubics):
    for d in cubics.values():
        if is_peripheral(d):
            assert peripheral_normalize(d) == (d, [])
    base = _with_site(cubics["II1"], "white_in", is_peripheral)
    _, moved = _first(base, "white_in")
    assert not is_peripheral(moved)
    res = peripheral_normalize(moved)
    assert res is not None and is_peripheral(res[0])
    assert canonical_code(replay(moved, res[1])) == canonical_code(res[0])


def test_stale_and_bogus_sites(cubics):
    d = cubics["II2"]
    m, after = successors(d)[0]
    with pytest.raises(PatternMismatch):
        apply(after, m)  # the stamp belongs to d
    with pytest.raises(PatternMismatch):
        apply(d, MoveSite("destroy_bridge", (0,)))
    with pytest.raises(PatternMismatch):
        MoveSite.parse_line("teleport 1 2")


def test_scripts_round_trip(cubics):
    d = cubics["II3"]
    sites = applicable_moves(d)[:3]
    assert [s.line() for s in read_script(write_script(sites))] == [s.line() for s in sites]


def test_elementary_walks_keep_degree_and_zigzags(cubics, rng):
    for d in cubics.values():
        end, _ = random_walk(d, 25, rng, ELEMENTARY_KINDS)
        assert degree(end) == 3
        assert boundary_profile(end).zigzags == boundary_profile(d).zigzags


def test_equivalence_finds_replayable_paths(cubics, rng):
    d = cubics["II1"]
    end, _ = random_walk(d, 5, rng, ELEMENTARY_KINDS)
    res = equivalent(d, end)
    assert res.verdict == "yes"
    assert canonical_code(replay(d, res.moves)) == canonical_code(end)
