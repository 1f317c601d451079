"""j-invariants, Weierstrass data and the numeric dessin tracer.

The tracer works on the conjugation quotient of the base line, realised as
the closed unit disk through the Cayley map ``t = i(1 + w)/(1 - w)``.  The
real line becomes the unit circle, so every vertex of the quotient dessin
has a bounded position.  A value ``[cos th : sin th]`` of ``j`` is followed
along the circle ``th in [0, pi)``; between two consecutive special values
(``0``, ``1``, ``inf`` and the real critical values) the ``6n`` preimages
move along disjoint arcs, which are continued by a predictor-corrector
scheme and glued at their end points.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from numpy.polynomial import polynomial as npoly

from .core import DISK, Dessin, MapBuilder, validate
from .errors import (
    DegenerateQuadruple,
    Indeterminate,
    NonGenericInput,
    NonGenericPoint,
    TracingFailure,
)

INF = complex(math.inf, 0.0)


def _is_inf(z) -> bool:
    return z is None or cmath.isinf(complex(z))


# ----------------------------------------------------------------------
# cross-ratio and j


def cross_ratio(z1, z2, z3, z4) -> complex:
    """Cross-ratio ``(z1-z3)/(z2-z3) : (z1-z4)/(z2-z4)``; ``INF`` stands for infinity."""
    pts = [z1, z2, z3, z4]
    inf = [_is_inf(z) for z in pts]
    val = [None if i else complex(z) for z, i in zip(pts, inf)]

    def same(i, j):
        return (inf[i] and inf[j]) or (not inf[i] and not inf[j] and val[i] == val[j])

    for a, b, c in combinations(range(4), 3):
        if same(a, b) and same(b, c):
            raise DegenerateQuadruple("three or more points coincide")
    if sum(inf) == 2:
        # both points at infinity coincide; take the limit
        pair = tuple(k for k in range(4) if inf[k])
        return {(0, 1): 1 + 0j, (2, 3): 1 + 0j, (0, 2): 0j, (1, 3): 0j}.get(pair, INF)
    top = bot = 1 + 0j
    for i, j in ((0, 2), (1, 3)):
        if not (inf[i] or inf[j]):
            top *= val[i] - val[j]
    for i, j in ((1, 2), (0, 3)):
        if not (inf[i] or inf[j]):
            bot *= val[i] - val[j]
    if bot == 0:
        return INF
    return top / bot


def j_from_lambda(lam) -> complex:
    if _is_inf(lam):
        return INF
    lam = complex(lam)
    den = 27 * lam**2 * (lam - 1) ** 2
    if den == 0:
        return INF
    return 4 * (lam**2 - lam + 1) ** 3 / den


def j_invariant(z1, z2, z3, z4=INF) -> complex:
    """j-invariant of four points (three points plus infinity by default)."""
    return j_from_lambda(cross_ratio(z1, z2, z3, z4))


def triangle_predicates(z1, z2, z3) -> dict:
    """Shape of the triangle ``z1 z2 z3`` as read off from its j-invariant."""
    pts = [complex(z1), complex(z2), complex(z3)]
    if len({*pts}) < 3:
        raise DegenerateQuadruple("triangle vertices must be distinct")
    j = j_invariant(*pts)
    scale = max(1.0, abs(j))
    report = {"j": j, "real": abs(j.imag) <= 1e-9 * scale}
    if report["real"]:
        report["isosceles"] = j.real < 1
        report["collinear"] = j.real >= 1
        return report
    # order vertices by the length of the opposite side
    opp = [abs(pts[1] - pts[2]), abs(pts[0] - pts[2]), abs(pts[0] - pts[1])]
    order = sorted(range(3), key=lambda i: opp[i])
    a, b, c = (pts[i] for i in order)
    area = ((b - a).conjugate() * (c - a)).imag
    sense = "anticlockwise" if area > 0 else "clockwise"
    predicted = "clockwise" if j.imag > 0 else "anticlockwise"
    report.update(isosceles=False, collinear=False, order=[pts[i] for i in order],
                  sense=sense, predicted_sense=predicted, consistent=sense == predicted)
    return report


# ----------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class RealPolynomial:
    """Real univariate polynomial, coefficients in ascending degree."""

    coeffs: tuple[float, ...]

    def __init__(self, coeffs):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in np.atleast_1d(coeffs)) or (0.0,))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)

    def degree(self, tol: float = 1e-12) -> int:
        c = self.array
        scale = max(1.0, float(np.max(np.abs(c)))) if c.size else 1.0
        nz = np.nonzero(np.abs(c) > tol * scale)[0]
        return int(nz[-1]) if nz.size else -1

    def __call__(self, z):
        return npoly.polyval(z, self.array)

    def __add__(self, other):
        return RealPolynomial(npoly.polyadd(self.array, _arr(other)))

    def __sub__(self, other):
        return RealPolynomial(npoly.polysub(self.array, _arr(other)))

    def __mul__(self, other):
        return RealPolynomial(npoly.polymul(self.array, _arr(other)))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        return RealPolynomial(npoly.polypow(self.array, k))

    def __neg__(self):
        return RealPolynomial(-self.array)


def _arr(p) -> np.ndarray:
    if isinstance(p, RealPolynomial):
        return p.array
    return np.atleast_1d(np.asarray(p, dtype=float))


@dataclass(frozen=True)
class WeierstrassPair:
    """Sections ``g2``, ``g3`` of degrees at most ``2n`` and ``3n``."""

    g2: RealPolynomial
    g3: RealPolynomial
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise NonGenericInput("n must be positive")
        if self.g2.degree() > 2 * self.n or self.g3.degree() > 3 * self.n:
            raise NonGenericInput(f"degrees exceed (2n, 3n) = ({2 * self.n}, {3 * self.n})")
        if not np.any(np.abs(self.discriminant().array) > 1e-12 * self._scale()):
            raise NonGenericInput("discriminant vanishes identically")

    def _scale(self) -> float:
        return max(1.0, float(np.max(np.abs(self.g2.array))) ** 3,
                   float(np.max(np.abs(self.g3.array))) ** 2)

    def discriminant(self) -> RealPolynomial:
        return -4 * self.g2**3 - 27 * self.g3**2

    def forms(self) -> tuple[np.ndarray, np.ndarray]:
        """Coefficients padded to the full section degrees ``2n`` and ``3n``."""
        a = np.zeros(2 * self.n + 1)
        b = np.zeros(3 * self.n + 1)
        g2, g3 = self.g2.array, self.g3.array
        a[: min(len(g2), len(a))] = g2[: len(a)]
        b[: min(len(g3), len(b))] = g3[: len(b)]
        return a, b


def j_from_weierstrass(w: WeierstrassPair, z, tol: float = 1e-12) -> complex:
    """``-4 g2^3 / Delta`` at ``z``."""
    z = complex(z)
    g2 = complex(w.g2(z))
    g3 = complex(w.g3(z))
    num = -4 * g2**3
    den = num - 27 * g3**2
    scale = max(1.0, abs(g2) ** 3, abs(g3) ** 2)
    if abs(den) <= tol * scale:
        if abs(num) <= tol * scale:
            raise Indeterminate("g2 and the discriminant vanish together")
        return INF
    return num / den


def weierstrass_from_cubic(a, b, c, d, n: int | None = None) -> WeierstrassPair:
    """Depressed form of ``a w^3 + b w^2 + c w + d`` with cleared denominators."""
    a, b, c, d = (p if isinstance(p, RealPolynomial) else RealPolynomial(p) for p in (a, b, c, d))
    if a.degree() < 0:
        raise NonGenericInput("leading coefficient a vanishes identically")
    g2 = 9 * a * c - 3 * b**2
    g3 = 2 * b**3 - 9 * a * b * c + 27 * a**2 * d
    if n is None:
        n = max(1, math.ceil(max(g2.degree(), 0) / 2), math.ceil(max(g3.degree(), 0) / 3))
    return WeierstrassPair(g2, g3, n)


def poly_roots(coeffs, polish: int = 3) -> np.ndarray:
    """Roots of an ascending complex coefficient vector via the companion matrix."""
    c = np.asarray(coeffs, dtype=complex)
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0:
        return np.zeros(0, dtype=complex)
    nz = np.nonzero(np.abs(c) > 1e-14 * scale)[0]
    c = c[: nz[-1] + 1]
    if c.size <= 1:
        return np.zeros(0, dtype=complex)
    r = np.roots(c[::-1])
    if polish:
        dc = npoly.polyder(c)
        for _ in range(polish):
            f = npoly.polyval(r, c)
            df = npoly.polyval(r, dc)
            ok = np.abs(df) > 1e-300
            step = np.where(ok, f / np.where(ok, df, 1), 0)
            small = np.abs(step) < 1e-3 * (1 + np.abs(r))
            r = np.where(small, r - step, r)
    return r


def roots_of_cubic(a: float, b: float, c: float, d: float) -> np.ndarray:
    return poly_roots([d, c, b, a])


# ----------------------------------------------------------------------
# pointed quartics

QUARTIC_MONOMIALS = tuple(
    (i, j, 4 - i - j) for i in range(4, -1, -1) for j in range(4 - i, -1, -1)
)
"""Exponents ``(x, y, z)`` of the 15 quartic coefficients, in input order."""


@dataclass(frozen=True)
class PointedQuartic:
    coeffs: tuple[float, ...]
    point: tuple[float, float, float]

    def __post_init__(self):
        if len(self.coeffs) != 15:
            raise NonGenericInput("a quartic needs 15 coefficients")

    def value(self, p) -> float:
        x, y, z = p
        return sum(c * x**i * y**j * z**k for c, (i, j, k) in zip(self.coeffs, QUARTIC_MONOMIALS))

    def gradient(self, p) -> np.ndarray:
        x, y, z = p
        g = np.zeros(3)
        for c, (i, j, k) in zip(self.coeffs, QUARTIC_MONOMIALS):
            if i:
                g[0] += c * i * x ** (i - 1) * y**j * z**k
            if j:
                g[1] += c * j * x**i * y ** (j - 1) * z**k
            if k:
                g[2] += c * k * x**i * y**j * z ** (k - 1)
        return g


def _substitute(coeffs, monos, mat) -> dict[tuple[int, int, int], float]:
    """Coefficients of ``F(M (X, Y, Z))`` for a homogeneous ``F``."""
    out: dict[tuple[int, int, int], float] = {}
    lin = [np.asarray(mat[r], dtype=float) for r in range(3)]
    for c, e in zip(coeffs, monos):
        if c == 0:
            continue
        terms = {(0, 0, 0): float(c)}
        for r, power in enumerate(e):
            for _ in range(power):
                nxt: dict[tuple[int, int, int], float] = {}
                for mono, val in terms.items():
                    for s in range(3):
                        if lin[r][s] == 0:
                            continue
                        m2 = list(mono)
                        m2[s] += 1
                        key = tuple(m2)
                        nxt[key] = nxt.get(key, 0.0) + val * lin[r][s]
                terms = nxt
        for mono, val in terms.items():
            out[mono] = out.get(mono, 0.0) + val
    return out


def trigonal_from_quartic(q: PointedQuartic, tol: float = 1e-7) -> WeierstrassPair:
    """Trigonal model in the second Hirzebruch surface of a pointed quartic.

    The marked point is moved to ``[0:0:1]`` and the pencil of lines through
    it is parametrised by ``t = Y/X``.
    """
    p = np.asarray(q.point, dtype=float)
    p = p / np.linalg.norm(p)
    scale = max(abs(c) for c in q.coeffs)
    if abs(q.value(p)) > tol * scale * 10:
        raise NonGenericPoint("the marked point is not on the curve")
    grad = q.gradient(p)
    if np.linalg.norm(grad) <= tol * scale:
        raise NonGenericPoint("the marked point is singular")
    # basis (u, v, p) with u spanning the tangent direction inside the tangent plane
    basis = np.linalg.svd(np.vstack([p, grad]))[2]
    u = basis[2]
    v = np.cross(p, u)
    mat = np.column_stack([u, v, p])
    sub = _substitute(q.coeffs, QUARTIC_MONOMIALS, mat)
    forms = []
    for deg in range(1, 5):
        # coefficient of Z^(4-deg) X^(deg-j) Y^j
        forms.append(RealPolynomial([sub.get((deg - j, j, 4 - deg), 0.0) for j in range(deg + 1)]))
    f1, f2, f3, f4 = forms
    if f1.degree() < 1:
        raise NonGenericPoint("degenerate tangent form")
    t0 = -f1.coeffs[0] / f1.coeffs[1]
    b0, c0, d0 = f2(t0), f3(t0), f4(t0)
    sc = max(1.0, abs(b0), abs(c0), abs(d0))
    if abs(b0) <= tol * sc * 100:
        raise NonGenericPoint("the marked point is an inflection point")
    if abs(c0 * c0 - 4 * b0 * d0) <= tol * sc * sc * 100:
        raise NonGenericPoint("the tangent line is a bitangent")
    return weierstrass_from_cubic(f1, f2, f3, f4, n=2)


def cubic_pencil(coeffs10, point, tol: float = 1e-9) -> WeierstrassPair:
    """Trigonal model in the first Hirzebruch surface of a plane cubic and a point off it.

    ``coeffs10`` are the cubic's coefficients in the order of
    :data:`CUBIC_MONOMIALS`.
    """
    p = np.asarray(point, dtype=float)
    p = p / np.linalg.norm(p)
    q, r = np.linalg.svd(p[None, :])[2][1:]
    mat = np.column_stack([q, r, p])
    sub = _substitute(coeffs10, CUBIC_MONOMIALS, mat)
    forms = [RealPolynomial([sub.get((deg - j, j, 3 - deg), 0.0) for j in range(deg + 1)])
             for deg in range(0, 4)]
    if abs(forms[0].coeffs[0]) <= tol:
        raise NonGenericPoint("the point lies on the cubic")
    return weierstrass_from_cubic(*forms, n=1)


CUBIC_MONOMIALS = tuple((i, j, 3 - i - j) for i in range(3, -1, -1) for j in range(3 - i, -1, -1))


# ----------------------------------------------------------------------
# tracing


@dataclass
class TraceOptions:
    root_tol: float = 1e-7
    collision: float = 1e-6
    real_tol: float = 1e-7
    min_step: float = 1e-13
    max_steps: int = 200000
    value_sep: float = 1e-6


@dataclass
class TraceResult:
    dessin: Dessin
    positions: dict[int, complex]
    log: list[str] = field(default_factory=list)


def _compose_form(coeffs: np.ndarray, A: complex, B: complex, C: complex, D: complex) -> np.ndarray:
    """``G(w) = sum_k g_k (A w + B)^k (C w + D)^(m - k)`` for a degree-``m`` binary form."""
    m = len(coeffs) - 1
    out = np.zeros(m + 1, dtype=complex)
    for k, g in enumerate(coeffs):
        if g == 0:
            continue
        term = npoly.polymul(npoly.polypow([B, A], k), npoly.polypow([D, C], m - k))
        out[: len(term)] += g * term
    return out


class _Node:
    __slots__ = ("pos", "mult", "vertex", "theta_index")

    def __init__(self, pos, mult, vertex, theta_index):
        self.pos = pos
        self.mult = mult
        self.vertex = vertex
        self.theta_index = theta_index


def _cluster(roots: np.ndarray, tol: float) -> list[tuple[complex, int]]:
    left = list(roots)
    out = []
    while left:
        z = left.pop()
        grp = [z]
        changed = True
        while changed:
            changed = False
            for other in list(left):
                if min(abs(other - g) for g in grp) <= tol:
                    grp.append(other)
                    left.remove(other)
                    changed = True
        out.append((complex(np.mean(grp)), len(grp)))
    return out


def trace(w: WeierstrassPair, options: TraceOptions | None = None,
          mobius: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 1.0)) -> TraceResult:
    """Extract the real dessin of ``j = -4 g2^3 / Delta`` on the closed upper half-plane.

    ``mobius = (a, b, c, d)`` with ``ad - bc > 0`` optionally reparametrises the
    base by ``t = (a u + b)/(c u + d)`` before tracing.
    """
    opt = options or TraceOptions()
    log: list[str] = []
    a, b, c, d = mobius
    if a * d - b * c <= 0:
        raise NonGenericInput("the base reparametrisation must preserve orientation")
    A, B = a * 1j - b, a * 1j + b
    C, D = c * 1j - d, c * 1j + d
    f2, f3 = w.forms()
    G2 = _compose_form(f2, A, B, C, D)
    G3 = _compose_form(f3, A, B, C, D)
    P = -4 * npoly.polymul(npoly.polymul(G2, G2), G2)
    Q = P - 27 * npoly.polymul(G3, G3)
    deg = 6 * w.n
    P = np.pad(P, (0, deg + 1 - len(P)))[: deg + 1]
    Q = np.pad(Q, (0, deg + 1 - len(Q)))[: deg + 1]
    s = np.max(np.abs(Q))
    P, Q = P / s, Q / s
    if np.max(np.abs(np.outer(P, Q) - np.outer(Q, P))) < 1e-12:
        raise NonGenericInput("isotrivial: the j-invariant is constant")
    dP, dQ = npoly.polyder(P), npoly.polyder(Q)

    def jval(z):
        q = npoly.polyval(z, Q)
        p = npoly.polyval(z, P)
        return INF if q == 0 else p / q

    # essential vertices from the roots of g2, g3 and Delta
    coll = opt.collision
    essential: list[tuple[complex, int, str]] = []
    for poly, color, factor in ((G2, "black", 3), (G3, "white", 2), (Q, "cross", 1)):
        rts = poly_roots(poly)
        for z, k in _cluster(rts, coll):
            essential.append((z, k * factor, color))
    if len(essential) == 0:
        raise NonGenericInput("no vertices")
    for (z1, _, c1), (z2, _, c2) in combinations(essential, 2):
        if c1 != c2 and abs(z1 - z2) <= coll:
            raise NonGenericInput(f"{c1} and {c2} vertices collide at {z1:.6g}")
    # critical points of j that are not essential vertices
    W = npoly.polysub(npoly.polymul(dP, Q), npoly.polymul(P, dQ))
    crit = poly_roots(W)
    monos: list[tuple[complex, float]] = []
    crit_sep = max(coll, 1e-4)
    for z in crit:
        if any(abs(z - e[0]) <= crit_sep for e in essential):
            continue
        if abs(z) > 1 + 1e-6:
            continue
        val = jval(z)
        if _is_inf(val):
            continue
        if abs(abs(z) - 1) <= max(opt.real_tol, 1e-6):
            z = z / abs(z)
            monos.append((z, float(jval(z).real)))
        elif abs(val.imag) <= 1e-9 * max(1.0, abs(val)):
            monos.append((z, float(val.real)))
            log.append(f"inner monochrome vertex at {z:.6g}")
    monos_clustered: list[tuple[complex, float]] = []
    for z, v in monos:
        if any(abs(z - z2) <= crit_sep for z2, _ in monos_clustered):
            continue
        monos_clustered.append((z, v))
    monos = monos_clustered

    # vertices in the closed disk
    def in_disk(z):
        return abs(z) <= 1 + opt.real_tol

    def is_real(z):
        return abs(abs(z) - 1) <= opt.real_tol

    verts: list[tuple[complex, str, int, float]] = []  # pos, color, mult, theta
    for z, k, color in essential:
        if in_disk(z):
            if is_real(z):
                z = z / abs(z)
            th = {"black": math.pi / 2, "white": math.pi / 4, "cross": 0.0}[color]
            verts.append((z, color, k, th))
    for z, v in monos:
        th = math.atan2(1.0, v)
        for th0 in (0.0, math.pi / 4, math.pi / 2):
            if min(abs(th - th0), abs(th - th0 - math.pi)) < opt.value_sep:
                raise NonGenericInput("a critical value coincides with 0, 1 or infinity")
        verts.append((z, "mono", 2, th))

    thetas = [0.0, math.pi / 4, math.pi / 2]
    for v in verts:
        if v[2] and v[1] == "mono":
            if any(abs(v[3] - t) < 1e-12 for t in thetas):
                continue
            if any(abs(v[3] - t) < opt.value_sep for t in thetas):
                raise NonGenericInput("two critical values coincide")
            thetas.append(v[3])
    thetas.sort()
    log.append(f"special values (angles): {[round(t, 6) for t in thetas]}")

    def F(th):
        return math.sin(th) * P - math.cos(th) * Q

    # nodes: all preimages of each special value
    nodes: list[list[_Node]] = []
    for ti, th in enumerate(thetas):
        rts = list(poly_roots(F(th)))
        here = [v for v in verts if abs(v[3] - th) < 1e-12]
        # mirror images of inner monochrome vertices lie outside the disk
        here += [(1 / z.conjugate(), "mono_mirror", k, t) for z, color, k, t in here
                 if color == "mono" and not is_real(z)]
        layer: list[_Node] = []
        for z, color, k, _ in here:
            grab = min(k, len(rts))
            rts.sort(key=lambda r: abs(r - z))
            rts = rts[grab:]
            layer.append(_Node(z, grab, None if color == "mono_mirror" else (color, z), ti))
        # the essential vertices outside the disk also absorb their roots
        if th in (0.0, math.pi / 4, math.pi / 2):
            col = {0.0: "cross", math.pi / 4: "white", math.pi / 2: "black"}[th]
            for z, k, color in essential:
                if color == col and not in_disk(z):
                    rts.sort(key=lambda r: abs(r - z))
                    rts = rts[k:]
                    layer.append(_Node(z, k, None, ti))
        for z in rts:
            if is_real(z):
                z = z / abs(z)
            layer.append(_Node(z, 1, None, ti))
        nodes.append(layer)

    # arcs over each interval
    pieces = []  # (start node, start angle, end node, end angle, kind, color)
    m = len(thetas)
    for i in range(m):
        th_a = thetas[i]
        th_b = thetas[i + 1] if i + 1 < m else thetas[0] + math.pi
        color = _interval_color(th_a, th_b)
        mid = 0.5 * (th_a + th_b)
        rts = poly_roots(F(mid), polish=6)
        if len(rts) != deg:
            raise TracingFailure(f"expected {deg} preimages at angle {mid:.6g}, found {len(rts)}")
        ends_a = _continue(rts, mid, th_a, P, Q, dP, dQ, nodes[i], opt)
        ends_b = _continue(rts, mid, th_b, P, Q, dP, dQ, nodes[(i + 1) % m], opt)
        for k, z in enumerate(rts):
            r = abs(z)
            if r > 1 + 1e-9:
                continue
            kind = "real" if r >= 1 - 1e-9 else "inner"
            (na, za), (nb, zb) = ends_a[k], ends_b[k]
            pieces.append((na, za, nb, zb, kind, color))
    log.append(f"{len(pieces)} arc pieces in the closed disk")
    return _assemble(pieces, nodes, log, w.n)


def _interval_color(th_a: float, th_b: float) -> str:
    mid = 0.5 * (th_a + th_b) % math.pi
    if mid < math.pi / 4:
        return "dotted"
    if mid < math.pi / 2:
        return "bold"
    return "solid"


def _continue(rts, th0, th1, P, Q, dP, dQ, layer, opt: TraceOptions):
    """Follow every root of ``F_th`` from ``th0`` to the end point ``th1``.

    Returns, for every root, the node it reaches and its last tracked
    position (used for the angle of the dart at that node).
    """
    z = np.array(rts, dtype=complex)
    th = th0
    h = (th1 - th0) / 16
    steps = 0
    npos = np.array([nd.pos for nd in layer])
    nsep = np.array([
        min([abs(nd.pos - o.pos) for o in layer if o is not nd] or [1.0]) for nd in layer
    ])
    while True:
        steps += 1
        if steps > opt.max_steps:
            raise TracingFailure("step budget exhausted while continuing an arc")
        dist = np.abs(z[:, None] - npos[None, :])
        nearest = np.argmin(dist, axis=1)
        near_d = dist[np.arange(len(z)), nearest]
        counts = np.bincount(nearest, minlength=len(layer))
        mults = np.array([nd.mult for nd in layer])
        captured = np.all(near_d < 0.05 * nsep[nearest]) and np.array_equal(counts, mults)
        if captured and abs(th1 - th) < 1e-3:
            break
        if abs(th1 - th) < opt.min_step:
            raise TracingFailure(f"could not separate the arcs ending at angle {th1:.6g}")
        # never jump more than half of the remaining gap
        hmax = (th1 - th) / 2
        if abs(h) > abs(hmax):
            h = hmax
        while True:
            zn = _step(z, th, h, P, Q, dP, dQ)
            if zn is not None:
                sep = _separation(z)
                move = np.abs(zn - z)
                if np.all(move < 0.25 * sep) and np.all(_separation(zn) > opt.collision * 1e-3):
                    break
            h /= 2
            if abs(h) < opt.min_step:
                raise TracingFailure(f"step control failed near angle {th:.9g}")
        z = zn
        th += h
        h *= 1.6
    return [(layer[nearest[k]], z[k]) for k in range(len(z))]


def _separation(z: np.ndarray) -> np.ndarray:
    d = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(d, np.inf)
    return d.min(axis=1)


def _step(z, th, h, P, Q, dP, dQ):
    def deriv(zz, t):
        num = math.cos(t) * npoly.polyval(zz, P) + math.sin(t) * npoly.polyval(zz, Q)
        den = math.sin(t) * npoly.polyval(zz, dP) - math.cos(t) * npoly.polyval(zz, dQ)
        return -num / den

    with np.errstate(all="ignore"):
        k1 = deriv(z, th)
        k2 = deriv(z + 0.5 * h * k1, th + 0.5 * h)
        zp = z + h * k2
        t = th + h
        Ft = math.sin(t) * P - math.cos(t) * Q
        dFt = math.sin(t) * dP - math.cos(t) * dQ
        for _ in range(8):
            f = npoly.polyval(zp, Ft)
            df = npoly.polyval(zp, dFt)
            corr = f / df
            zp = zp - corr
            if np.all(np.abs(corr) < 1e-13 * (1 + np.abs(zp))):
                break
        if not np.all(np.isfinite(zp)):
            return None
        if np.any(np.abs(corr) > 1e-8 * (1 + np.abs(zp))):
            return None
    return zp


def _assemble(pieces, nodes, log, n) -> TraceResult:
    # group piece ends by node
    ends: dict[int, list] = {}
    node_of: dict[int, _Node] = {}
    for pi, (na, za, nb, zb, kind, color) in enumerate(pieces):
        for side, nd, z in ((0, na, za), (1, nb, zb)):
            ends.setdefault(id(nd), []).append((pi, side, z))
            node_of[id(nd)] = nd
    b = MapBuilder(DISK)
    vkey: dict[int, int] = {}
    positions: dict[int, complex] = {}

    def real_pos(z):
        return abs(abs(z) - 1) <= 1e-6

    vertex_nodes = [nd for nd in node_of.values() if nd.vertex is not None]
    vertex_nodes.sort(key=lambda nd: (("black", "white", "cross", "mono").index(nd.vertex[0]),
                                      not real_pos(nd.pos), cmath.phase(nd.pos) % (2 * math.pi),
                                      abs(nd.pos)))
    for nd in vertex_nodes:
        v = b.add_vertex(nd.vertex[0], 0 if real_pos(nd.pos) else -1)
        vkey[id(nd)] = v
        positions[v] = nd.pos
    # darts at vertex nodes, ordered by angle
    dart_of: dict[tuple[int, int], int] = {}
    for nd in vertex_nodes:
        v = vkey[id(nd)]
        items = []
        for pi, side, z in ends[id(nd)]:
            ang = _angle(nd.pos, z, real_pos(nd.pos))
            items.append((ang, pi, side))
        items.sort()
        if real_pos(nd.pos):
            lo = [it for it in items if pieces[it[1]][4] == "real"]
            if len(lo) != 2:
                raise TracingFailure(f"real vertex at {nd.pos:.6g} has {len(lo)} boundary arcs")
        for ang, pi, side in items:
            dart_of[(pi, side)] = b.new_dart(v, pieces[pi][5])
    # follow edges through regular nodes
    used = set()
    for (pi, side), x in list(dart_of.items()):
        if (pi, side) in used:
            continue
        cur, cside = pi, side
        color = pieces[pi][5]
        while True:
            used.add((cur, cside))
            other = 1 - cside
            nd = pieces[cur][2] if other == 1 else pieces[cur][0]
            if (cur, other) in dart_of:
                used.add((cur, other))
                b.link(x, dart_of[(cur, other)])
                break
            nxt = [e for e in ends[id(nd)] if (e[0], e[1]) != (cur, other)]
            if len(nxt) != 1:
                raise TracingFailure(f"regular point at {nd.pos:.6g} joins {len(nxt) + 1} arcs")
            cur, cside = nxt[0][0], nxt[0][1]
            if pieces[cur][5] != color:
                raise TracingFailure("an edge changes color at a regular point")
    start = min((v for v in positions if abs(abs(positions[v]) - 1) <= 1e-6),
                key=lambda v: cmath.phase(positions[v]) % (2 * math.pi), default=None)
    if start is not None:
        b.starts[0] = start
    dessin = b.build()
    report = validate(dessin)
    if report:
        raise TracingFailure("traced graph is not a dessin: " + "; ".join(report))
    order = sorted(positions)
    pos_out = {i: positions[v] for i, v in enumerate(order)}
    return TraceResult(dessin, pos_out, log)


def _angle(center: complex, z: complex, real: bool) -> float:
    if real:
        u = center / abs(center)
        xi = (z - center) / (1j * u)
        a = cmath.phase(xi)
        if a < -math.pi / 2:
            a += 2 * math.pi
        return a
    return cmath.phase(z - center) % (2 * math.pi)


def trace_dessin(w: WeierstrassPair, options: TraceOptions | None = None) -> Dessin:
    return trace(w, options).dessin


# ----------------------------------------------------------------------
# input parsing and the pointed-quartic pipeline


def parse_polynomials(text: str) -> dict[str, RealPolynomial]:
    """Read lines ``name = c0 c1 c2 ...`` (ascending coefficients)."""
    out = {}
    for lno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        name, sep, rest = line.partition("=")
        if not sep or not name.strip():
            raise NonGenericInput(f"line {lno}: expected 'name = c0 c1 ...'")
        try:
            out[name.strip()] = RealPolynomial([float(t) for t in rest.split()])
        except ValueError:
            raise NonGenericInput(f"line {lno}: coefficients must be numbers") from None
    return out


def oval_count(coeffs, monomials=QUARTIC_MONOMIALS, resolution: int = 81) -> int:
    """Number of real components of an even-degree plane curve, by sign sampling.

    The form is sampled on a spherical shell; the zero set cuts the sphere
    into ``2 b0 + 1`` sign regions, counted with a connected-component pass.
    """
    from scipy import ndimage

    g = np.linspace(-1.2, 1.2, resolution)
    x, y, z = np.meshgrid(g, g, g, indexing="ij")
    r = np.sqrt(x * x + y * y + z * z)
    shell = (r > 0.8) & (r < 1.2)
    f = np.zeros_like(x)
    for c, (i, j, k) in zip(coeffs, monomials):
        if c:
            f += c * x**i * y**j * z**k
    conn = np.ones((3, 3, 3))
    regions = ndimage.label(shell & (f > 0), conn)[1] + ndimage.label(shell & (f < 0), conn)[1]
    return (regions - 1) // 2


@dataclass
class QuarticTrace:
    dessin: Dessin
    weierstrass: WeierstrassPair
    coeffs: tuple[float, ...]
    perturbation: float
    b0_sampled: int
    log: list[str] = field(default_factory=list)


def _vanishing_direction(point, rng) -> np.ndarray:
    e = rng.normal(size=15)
    mons = np.array([point[0] ** i * point[1] ** j * point[2] ** k for i, j, k in QUARTIC_MONOMIALS])
    # remove the component along the evaluation functional so that e(p) = 0
    e -= mons * (e @ mons) / (mons @ mons)
    return e / np.linalg.norm(e)


_GENERIC_INDEX = {"black": 3, "white": 2, "cross": 1}


def _toile_defect(d: Dessin) -> str | None:
    """Why a traced dessin is not a generic uninodal toile, or ``None``."""
    nodes = []
    for v in range(d.n_vertices):
        c = d.vcolor[v]
        if c == "mono":
            continue
        if c == "cross" and d.index(v) == 2 and d.vcircle[v] >= 0:
            nodes.append(v)
        elif d.index(v) != _GENERIC_INDEX[c]:
            return f"non-generic {c} vertex of index {d.index(v)}"
    if len(nodes) != 1:
        return f"expected one real node, found {len(nodes)}"
    return None


def from_quartic(coeffs, point, options: TraceOptions | None = None,
                 perturbations=(0.0, 0.01, 0.03, 0.1), seed: int = 7, tol: float = 1e-7) -> QuarticTrace:
    """Trace the uninodal toile of a pointed quartic.

    When the quartic is not generic for the construction (for instance a
    perfect-square ``g3``), the curve is deformed by a small multiple of a
    random quartic vanishing at ``p``; a deformation is accepted only if the
    sampled oval count is unchanged.
    """
    c0 = np.asarray(coeffs, dtype=float)
    if c0.size != 15:
        raise NonGenericInput("a quartic needs 15 coefficients")
    c0 = c0 / np.linalg.norm(c0)
    p = np.asarray(point, dtype=float)
    p = p / np.linalg.norm(p)
    b0 = oval_count(c0)
    rng = np.random.default_rng(seed)
    e = _vanishing_direction(p, rng)
    log = [f"sampled oval count {b0}"]
    last: Exception | None = None
    for eps in perturbations:
        cf = c0 + eps * e
        if eps and oval_count(cf) != b0:
            log.append(f"perturbation {eps}: oval count changed, skipped")
            continue
        q = PointedQuartic(tuple(cf), tuple(p))
        w = trigonal_from_quartic(q, tol)  # point-level genericity failures propagate
        try:
            res = trace(w, options)
        except (NonGenericInput, TracingFailure) as exc:
            log.append(f"perturbation {eps}: {type(exc).__name__}: {exc}")
            last = exc
            continue
        d = res.dessin
        problem = _toile_defect(d)
        if problem:
            log.append(f"perturbation {eps}: {problem}")
            last = NonGenericInput(problem)
            continue
        log.append(f"perturbation {eps}: traced {d.n_vertices} vertices")
        return QuarticTrace(d, w, tuple(cf), eps, b0, log + res.log)
    if isinstance(last, NonGenericInput):
        raise NonGenericInput("; ".join(log))
    raise TracingFailure("; ".join(log))
