import random

import pytest

from realdessins.classify import fixture_dir, fixture_names, load_fixture
from realdessins.core import (
    DISK,
    MapBuilder,
    boundary_profile,
    canonical_code,
    color_sums,
    degree,
    double_cover,
    index,
    regions,
    singular_vertices,
    validate,
)
from realdessins.errors import ColorSumMismatch, DessinSyntaxError
from realdessins.fileio import from_json, parse, serialize, to_json


def _relabel(d, seed):
    """The same dessin with vertices stored in a random order."""
    rnd = random.Random(seed)
    order = list(range(d.n_vertices))
    rnd.shuffle(order)
    b = MapBuilder(d.surface)
    new = {}
    for v in order:
        new[v] = b.add_vertex(d.vcolor[v], d.vcircle[v])
    dart = {}
    for v in order:
        for x in d.darts(v):
            dart[x] = b.new_dart(new[v], d.ecolor[x])
    for x, m in d.edges():
        b.link(dart[x], dart[m])
    b.starts = {c: new[seq[rnd.randrange(len(seq))]] for c, seq in enumerate(d.boundary)}
    return b.build()


def test_fixtures_parse_and_validate():
    names = fixture_names()
    assert len([n for n in names if n.startswith("cubic_")]) == 8
    for name in names:
        d = load_fixture(name)
        assert validate(d) == [], name


def test_cubic_I1_is_a_disk_cubic(cubics):
    d = cubics["I1"]
    assert degree(d) == 3
    assert d.surface == DISK and len(d.boundary) == 1


def test_serialize_round_trip():
    for name in fixture_names():
        d = load_fixture(name)
        t = serialize(d)
        assert serialize(parse(t)) == t
        assert canonical_code(parse(t)) == canonical_code(d)


def test_json_round_trip(cubics):
    for d in cubics.values():
        assert canonical_code(from_json(to_json(d))) == canonical_code(d)


def test_parse_errors_carry_positions():
    with pytest.raises(DessinSyntaxError) as exc:
        parse("dessin v2 surface=orientable:0:1\n")
    assert exc.value.line == 1
    with pytest.raises(DessinSyntaxError):
        parse("")


def test_empty_vertex_list_leaves_circle_uncovered():
    with pytest.raises(DessinSyntaxError, match="boundary circle uncovered"):
        parse("dessin v1 surface=orientable:0:1\n")


def test_hyperbolic_cubic_validates(cubics):
    assert validate(cubics["H"]) == []
    assert degree(cubics["H"]) == 3


def test_monochrome_vertex_needs_three_edges(cubics):
    # drop the inner edge of a real monochrome vertex of the hyperbolic cubic
    d = cubics["H"]
    m = next(v for v in d.real_vertices() if d.vcolor[v] == "mono")
    b = MapBuilder.from_dessin(d)
    x = next(iter(d.inner_darts(m)))
    b.drop_dart(d.mate[x])
    b.drop_dart(x)
    rep = validate(b.build())
    assert any("monochrome vertex incident to at least 3 edges" in r for r in rep)


def _cycle_oracle(d):
    """Independent search for a directed monochrome cycle (colouring DFS on edge directions)."""
    adj = {}
    for x in range(d.n_darts):
        u, w = d.dvert[x], d.target(x)
        if d.vcolor[u] == d.vcolor[w] == "mono" and d.direction(x) == 1:
            adj.setdefault(u, set()).add(w)
    colour = {}

    def visit(v):
        colour[v] = 1
        for w in adj.get(v, ()):
            if colour.get(w) == 1 or (w not in colour and visit(w)):
                return True
        colour[v] = 2
        return False

    return any(v not in colour and visit(v) for v in list(adj))


def test_admissibility_agrees_with_cycle_oracle(cubics, rng):
    from conftest import random_walk
    from realdessins.core import _has_mono_cycle

    for d in cubics.values():
        end, trail = random_walk(d, 15, rng)
        for _, state in trail:
            assert _has_mono_cycle(state) == _cycle_oracle(state) is False


def test_region_cycles_are_multiples_of_three(cubics):
    for d in cubics.values():
        for r in regions(d):
            assert len(r.colors) % 3 == 0 and r.sign in (1, -1)


def test_euler_count_of_the_disk(cubics):
    d = cubics["I1"]
    v, e, r = d.n_vertices, d.n_darts // 2, len(regions(d))
    assert v - e + r == 1


def test_indices_and_double_cover(cubics):
    for d in cubics.values():
        cov = double_cover(d)
        assert validate(cov) == []
        assert cov.surface.euler == 2
        # lifted vertices are created in order: one per real vertex, two per inner vertex
        lifts, k = {}, 0
        for v in range(d.n_vertices):
            n = 1 if d.vcircle[v] >= 0 else 2
            lifts[v] = list(range(k, k + n))
            k += n
        for v, ws in lifts.items():
            for w in ws:
                assert index(d, v) == cov.degs[w] // 2
                if d.vcircle[v] >= 0:
                    assert cov.degs[w] == 2 * (d.degs[v] - 2) + 2


def test_cubics_are_nonsingular(cubics):
    for d in cubics.values():
        assert singular_vertices(d) == []
        assert set(color_sums(d).values()) == {6}


def test_toile_has_one_node(toiles):
    assert toiles
    for name, d in toiles.items():
        sing = singular_vertices(d)
        assert len(sing) == 1, name
        v = sing[0]
        assert d.vcolor[v] == "cross" and index(d, v) == 2
        assert degree(d) == 6
        assert set(color_sums(d).values()) == {12}


def test_lonely_inner_cross_has_mismatched_sums():
    from realdessins.core import Dessin

    lone = Dessin(DISK, ("cross",), (-1,), (2,), (1, 0), ("dotted", "dotted"), ((),))
    with pytest.raises(ColorSumMismatch):
        degree(lone)


def test_boundary_profiles(cubics):
    assert boundary_profile(cubics["I2"]).zigzags == 2
    assert boundary_profile(cubics["I1"]).zigzags == 1
    h = boundary_profile(cubics["H"])
    assert h.hyperbolic >= 1 and h.zigzags == 0
    for name, d in cubics.items():
        if name != "H":
            assert boundary_profile(d).zigzags == int(name.lstrip("I"))


def test_zigzag_segment_between_simple_crosses(cubics):
    prof = boundary_profile(cubics["II1"])
    zz = [s for s in prof.segments if s.kind == "zigzag"]
    assert len(zz) == 1 and zz[0].whites == 1


def test_canonical_code_ignores_storage_order(cubics):
    for d in cubics.values():
        c = canonical_code(d)
        for seed in range(100 if d is cubics["I2"] else 10):
            assert canonical_code(_relabel(d, seed)) == c


def test_canonical_codes_separate_fixtures(cubics):
    assert canonical_code(cubics["I1"]) != canonical_code(cubics["II1"])
    assert len({canonical_code(d) for d in cubics.values()}) == len(cubics)


def test_fixture_dir_override(tmp_path, monkeypatch):
    monkeypatch.setenv("DESSIN_FIXTURES", str(tmp_path))
    assert fixture_dir() == tmp_path
