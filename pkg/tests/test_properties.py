import random

from conftest import random_walk
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st
from test_core import _relabel

from realdessins.classify import CUBIC_NAMES, class_key, load_atlas, load_fixture
from realdessins.core import boundary_profile, canonical_code, color_sums, degree, validate
from realdessins.errors import ArcMismatch
from realdessins.fileio import parse, serialize
from realdessins.moves import ELEMENTARY_KINDS, WEAK_KINDS, check_conservation
from realdessins.structure import arcs, cut_along, dessin_type, find_cut_sites, glue_along_arc, node_profile

CUBICS = {n: load_fixture(f"cubic_{n}") for n in CUBIC_NAMES}
ATLAS = load_atlas()

fast = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
seeds = st.integers(0, 2**32 - 1)
cubic_names = st.sampled_from(CUBIC_NAMES)


@fast
@given(cubic_names, seeds, st.integers(1, 20))
def test_moves_conserve_the_axioms(name, seed, steps):
    d = CUBICS[name]
    sums = set(color_sums(d).values())
    _, trail = random_walk(d, steps, random.Random(seed))
    before = d
    for m, after in trail:
        assert validate(after) == []
        assert check_conservation(before, m, after) == []
        assert degree(after) == 3 and set(color_sums(after).values()) == sums
        dz = boundary_profile(after).zigzags - boundary_profile(before).zigzags
        assert dz == (0 if m.kind not in WEAK_KINDS else (1 if m.kind == "create_zigzag" else -1))
        before = after


@fast
@given(cubic_names, seeds)
def test_type_survives_moves(name, seed):
    d = CUBICS[name]
    end, _ = random_walk(d, 15, random.Random(seed))
    assert dessin_type(end) == dessin_type(d)


@fast
@given(st.integers(0, len(ATLAS) - 1), seeds)
def test_class_key_survives_moves(i, seed):
    r = ATLAS[i]
    end, _ = random_walk(r.representative, 10, random.Random(seed))
    assert class_key(end) == class_key(r.representative)


@fast
@given(st.integers(0, len(ATLAS) - 1), seeds)
def test_node_parities_survive_elementary_moves(i, seed):
    d = ATLAS[i].representative
    if ATLAS[i].invariants["type"] == "hyperbolic":
        return
    end, _ = random_walk(d, 10, random.Random(seed), ELEMENTARY_KINDS)
    assert node_profile(end).key() == node_profile(d).key()


@fast
@given(cubic_names, seeds)
def test_canonical_code_ignores_relabeling(name, seed):
    end, _ = random_walk(CUBICS[name], 6, random.Random(seed))
    assert canonical_code(_relabel(end, seed)) == canonical_code(end)


@fast
@given(cubic_names, seeds)
def test_text_round_trip(name, seed):
    end, _ = random_walk(CUBICS[name], 8, random.Random(seed))
    assert canonical_code(parse(serialize(end))) == canonical_code(end)


@fast
@given(cubic_names, cubic_names, st.sampled_from(["dotted", "solid", "bold"]), seeds)
def test_glue_then_cut_recovers_the_pieces(na, nb, color, seed):
    rnd = random.Random(seed)
    a, b = CUBICS[na], CUBICS[nb]
    xs, ys = arcs(a, "cut", color), arcs(b, "cut", color)
    assume(xs and ys)
    x, y = rnd.choice(xs), rnd.choice(ys)
    try:
        g = glue_along_arc(a, x, b, y)
    except ArcMismatch:
        return
    assert validate(g) == [] and degree(g) == 6
    want = sorted([canonical_code(a), canonical_code(b)])
    assert any(sorted(canonical_code(p) for p in cut_along(g, s)) == want for s in find_cut_sites(g, (color,)))
