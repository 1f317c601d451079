import cmath
import math
import re

import numpy as np
import pytest

from realdessins.classify import fixture_dir, load_fixture
from realdessins.core import canonical_code, degree, validate
from realdessins.errors import DegenerateQuadruple, NonGenericInput, NonGenericPoint
from realdessins.jinv import (
    INF,
    PointedQuartic,
    RealPolynomial,
    WeierstrassPair,
    cross_ratio,
    cubic_pencil,
    j_from_weierstrass,
    j_invariant,
    parse_polynomials,
    poly_roots,
    trace_dessin,
    triangle_predicates,
    trigonal_from_quartic,
    weierstrass_from_cubic,
)

FERMAT = [1.0 if e in ((4, 0, 0), (0, 4, 0)) else (-1.0 if e == (0, 0, 4) else 0.0)
          for e in [(i, j, 4 - i - j) for i in range(4, -1, -1) for j in range(4 - i, -1, -1)]]


def _direct_j(z1, z2, z3):
    # lambda from the ratio of differences, then the classical polynomial
    lam = (z1 - z3) / (z2 - z3)
    return 4 * (lam * lam - lam + 1) ** 3 / (27 * lam * lam * (lam - 1) ** 2)


def test_cross_ratio_values():
    assert cross_ratio(0, 1, 2, 3) == pytest.approx(((0 - 2) * (1 - 3)) / ((1 - 2) * (0 - 3)))
    with pytest.raises(DegenerateQuadruple):
        cross_ratio(1, 1, 1, 2)


def test_cross_ratio_limits_at_infinity():
    # (inf, 0, 1, x): the factors containing infinity cancel
    x = 3.0
    assert cross_ratio(INF, 0, 1, x) == pytest.approx((0 - x) / (0 - 1))


def test_symmetric_triples():
    w = cmath.exp(2j * math.pi / 3)
    assert abs(j_invariant(1, w, w * w)) <= 1e-9
    assert abs(j_invariant(-1, 0, 1) - 1) <= 1e-9


def test_j_against_direct_evaluation():
    z = (0, 1, 2 + 1j)
    assert j_invariant(*z) == pytest.approx(_direct_j(*z), rel=1e-12)


def test_weierstrass_special_cases():
    z = 0.3 + 0.2j
    w0 = WeierstrassPair(RealPolynomial([0.0]), RealPolynomial([1.0, 2.0]), 1)
    assert j_from_weierstrass(w0, z) == 0
    w1 = WeierstrassPair(RealPolynomial([1.0, -1.0]), RealPolynomial([0.0]), 1)
    assert j_from_weierstrass(w1, z) == pytest.approx(1)


def test_weierstrass_matches_roots():
    rng = np.random.default_rng(3)
    for _ in range(50):
        g2 = RealPolynomial(rng.normal(size=3))
        g3 = RealPolynomial(rng.normal(size=4))
        w = WeierstrassPair(g2, g3, 1)
        z = complex(*rng.normal(size=2))
        r = poly_roots([g3(z), g2(z), 0, 1])
        assert j_from_weierstrass(w, z) == pytest.approx(j_invariant(*r), rel=1e-8)


def test_triangle_predicates():
    assert triangle_predicates(0, 1, 0.5 + 0.7j)["isosceles"]
    assert triangle_predicates(0, 1, 0.5 + 0.7j)["j"].real < 1
    col = triangle_predicates(0, 1, 3)
    assert col["collinear"] and col["j"].real >= 1
    rep = triangle_predicates(0.5j, 0, 1)
    assert rep["order"] == [1, 0.5j, 0]


def test_weierstrass_from_cubic():
    rng = np.random.default_rng(5)
    c, d = RealPolynomial(rng.normal(size=3)), RealPolynomial(rng.normal(size=4))
    w = weierstrass_from_cubic(1.0, 0.0, c, d)
    assert np.allclose(w.g2.array, 9 * c.array) and np.allclose(w.g3.array, 27 * d.array)
    plain = WeierstrassPair(c, d, 1)
    for z in rng.normal(size=(5, 2)):
        z = complex(*z)
        assert j_from_weierstrass(w, z) == pytest.approx(j_from_weierstrass(plain, z), rel=1e-10)


def test_discriminant_vanishes_at_multiple_roots():
    rng = np.random.default_rng(8)
    a, b, c, d = (RealPolynomial(rng.normal(size=k)) for k in (1, 2, 3, 4))
    w = weierstrass_from_cubic(a, b, c, d)
    for t in rng.normal(size=6):
        coeffs = [d(t), c(t), b(t), a(t)]
        r = poly_roots(coeffs)
        prod = np.prod([(r[i] - r[j]) ** 2 for i in range(3) for j in range(i)])
        # W = 3a w + b turns the cubic into W^3 + g2 W + g3, whose roots are 3a r_i + b
        assert w.discriminant()(t) == pytest.approx((729 * coeffs[3] ** 6 * prod).real, rel=1e-6)


def test_quartic_sections_have_the_right_degrees():
    p = (math.cos(0.785), math.sin(0.785), 1.0)
    p = (p[0] / (p[0] ** 4 + p[1] ** 4) ** 0.25, p[1] / (p[0] ** 4 + p[1] ** 4) ** 0.25, 1.0)
    w = trigonal_from_quartic(PointedQuartic(tuple(FERMAT), p))
    assert w.n == 2 and w.g2.degree() <= 4 and w.g3.degree() <= 6


def test_inflection_point_is_rejected():
    # (1, 0, 1) is a hyperflex of x^4 + y^4 - z^4: the tangent x = z meets the curve only there
    with pytest.raises(NonGenericPoint):
        trigonal_from_quartic(PointedQuartic(tuple(FERMAT), (1.0, 0.0, 1.0)))


def test_isotrivial_input_is_rejected():
    with pytest.raises(NonGenericInput):
        trace_dessin(WeierstrassPair(RealPolynomial([1.0]), RealPolynomial([2.0]), 1))


def _fixture_pencil(name):
    text = (fixture_dir() / f"{name}.dss").read_text()
    p = [float(t) for t in re.search(r"p = \(([^)]*)\)", text).group(1).split(",")]
    terms = re.findall(r"([+-][0-9.]+)\*x\^", text)
    return [float(t) for t in terms], p


@pytest.mark.parametrize("name", ["cubic_II1", "cubic_I0"])
def test_traced_cubic_matches_its_fixture(name):
    coeffs, p = _fixture_pencil(name)
    d = trace_dessin(cubic_pencil(coeffs, p))
    assert validate(d) == [] and degree(d) == 3
    assert canonical_code(d) == canonical_code(load_fixture(name))


def test_parse_polynomials():
    polys = parse_polynomials("g2 = 1 0 -2\n# comment\ng3 = 0.5\n")
    assert polys["g2"].coeffs == (1.0, 0.0, -2.0) and polys["g3"].coeffs == (0.5,)
    with pytest.raises(NonGenericInput):
        parse_polynomials("g2 1 2")
