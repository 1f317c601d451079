"""Elementary and weak moves, normal forms and bounded equivalence search.

Every move is a local rewrite of the rotation system.  A site names the
move kind and a few anchor darts of the host dessin; :func:`apply` checks
the local pattern, performs the surgery and validates the result.  A site
is *applicable* when both succeed, so :func:`applicable_moves` never lists
a site that would produce an invalid dessin.

Anchor conventions (dart ids of the host dessin):

``monochrome_modification (d1, d2)``
    two darts of equally colored inner edges lying on the walk of one
    region; their partners are exchanged.
``create_bridge (e, f)``
    ``e`` a real dart and ``f`` an inner dart of the same color on one
    region walk.
``destroy_bridge (x)``
    the successor dart of the first monochrome end of the bridge.
``white_in / black_in (x)``
    the predecessor dart of the real monochrome vertex ``u``.
``white_out / black_out (x)``
    the inner dart of the real monochrome vertex ``m``.
``straighten_zigzag / create_zigzag (x)``
    the boundary dart at the start of the fragment; a predecessor dart
    reads the fragment along the boundary order, a successor dart reads
    it against it (mirror image).
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .core import Dessin, MapBuilder, boundary_profile, canonical_code, degree, validate
from .errors import DessinError, PatternMismatch, ValidityBroken

ELEMENTARY_KINDS = (
    "monochrome_modification",
    "create_bridge",
    "destroy_bridge",
    "white_in",
    "white_out",
    "black_in",
    "black_out",
)
WEAK_KINDS = ("straighten_zigzag", "create_zigzag")
KINDS = ELEMENTARY_KINDS + WEAK_KINDS
INVERSE = {
    "monochrome_modification": "monochrome_modification",
    "create_bridge": "destroy_bridge",
    "destroy_bridge": "create_bridge",
    "white_in": "white_out",
    "white_out": "white_in",
    "black_in": "black_out",
    "black_out": "black_in",
    "straighten_zigzag": "create_zigzag",
    "create_zigzag": "straighten_zigzag",
}


def structure_stamp(d: Dessin) -> str:
    """Short digest of the exact storage of ``d``; used to detect stale sites."""
    raw = repr((d.vcolor, d.vcircle, d.degs, d.mate, d.ecolor, d.boundary))
    return hashlib.sha1(raw.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class MoveSite:
    kind: str
    anchors: tuple[int, ...]
    color: str | None = None
    stamp: str | None = field(default=None, compare=False)

    def line(self) -> str:
        return " ".join([self.kind, *map(str, self.anchors)])

    @classmethod
    def parse_line(cls, line: str) -> "MoveSite":
        parts = line.split()
        if not parts or parts[0] not in KINDS:
            raise PatternMismatch(f"unknown move line {line!r}")
        try:
            anchors = tuple(int(p) for p in parts[1:])
        except ValueError:
            raise PatternMismatch(f"anchor darts must be integers: {line!r}") from None
        return cls(parts[0], anchors)

    @property
    def weak(self) -> bool:
        return self.kind in WEAK_KINDS


@dataclass(frozen=True)
class EquivalenceBudget:
    """Limits for the bounded searches.  ``max_vertices=None`` means three
    times the vertex count of the larger input."""

    max_vertices: int | None = None
    max_states: int = 20000
    max_depth: int = 14

    def __post_init__(self):
        for name in ("max_vertices", "max_states", "max_depth"):
            val = getattr(self, name)
            if val is not None and val <= 0:
                raise ValueError(f"{name} must be positive")


def read_script(text: str) -> list[MoveSite]:
    out = []
    for ln in text.splitlines():
        ln = ln.split("#", 1)[0].strip()
        if ln:
            out.append(MoveSite.parse_line(ln))
    return out


def write_script(moves: Iterable[MoveSite]) -> str:
    return "".join(m.line() + "\n" for m in moves)


# ----------------------------------------------------------------------
# oriented views of the boundary


class _View:
    """Reads real vertices along (``o = 1``) or against (``o = -1``) the boundary."""

    def __init__(self, d: Dessin, o: int):
        self.d, self.o = d, o

    def pred(self, v: int) -> int:
        return self.d.pred_dart(v) if self.o == 1 else self.d.succ_dart(v)

    def succ(self, v: int) -> int:
        return self.d.succ_dart(v) if self.o == 1 else self.d.pred_dart(v)

    def inner(self, v: int) -> list[int]:
        xs = list(self.d.inner_darts(v))
        return xs if self.o == 1 else xs[::-1]

    def darts(self, v: int) -> list[int]:
        xs = list(self.d.darts(v))
        return xs if self.o == 1 else xs[::-1]

    def next(self, v: int) -> int:
        return self.d.target(self.succ(v))


def _real(d: Dessin, v: int, color: str, deg: int) -> bool:
    return d.vcircle[v] >= 0 and d.vcolor[v] == color and d.degs[v] == deg


def _colors(d: Dessin, darts: list[int]) -> list[str]:
    return [d.ecolor[x] for x in darts]


def _add_vertex(b: MapBuilder, color: str, circle: int, slots: list[str], o: int) -> list[int]:
    """Add a vertex whose darts, read in view order, carry ``slots`` colors.

    Returns the new dart ids in view order.
    """
    v = b.add_vertex(color, circle)
    order = list(range(len(slots)))
    if o == -1:
        order.reverse()
    ids: dict[int, int] = {}
    for i in order:
        ids[i] = b.new_dart(v, slots[i])
    return [ids[i] for i in range(len(slots))]


# ----------------------------------------------------------------------
# the rewrites; each returns None when the pattern does not match


def _mm(d: Dessin, anchors) -> Dessin | None:
    if len(anchors) != 2:
        return None
    d1, d2 = anchors
    n = d.n_darts
    if not (0 <= d1 < n and 0 <= d2 < n) or d1 == d2:
        return None
    if d.real_dart(d1) or d.real_dart(d2) or d.ecolor[d1] != d.ecolor[d2]:
        return None
    if d.mate[d1] == d2 or d.face_of[d1] != d.face_of[d2] or d.face_of[d1] in d.hole_faces:
        return None
    b = MapBuilder.from_dessin(d)
    y1, y2 = d.mate[d1], d.mate[d2]
    b.link(d1, y2)
    b.link(d2, y1)
    return b.build()


def _create_bridge(d: Dessin, anchors) -> Dessin | None:
    if len(anchors) != 2:
        return None
    e, f = anchors
    n = d.n_darts
    if not (0 <= e < n and 0 <= f < n):
        return None
    q = d.dvert[e]
    if not d.real_dart(e) or d.pos(e) != 0 or d.real_dart(f):
        return None
    if d.ecolor[e] != d.ecolor[f] or d.face_of[e] != d.face_of[f]:
        return None
    color = d.ecolor[e]
    circle = d.vcircle[q]
    p_succ, g = d.mate[e], d.mate[f]
    b = MapBuilder.from_dessin(d)
    a1, b1, c1 = _add_vertex(b, "mono", circle, [color] * 3, 1)
    a2, b2, c2 = _add_vertex(b, "mono", circle, [color] * 3, 1)
    b.link(p_succ, a1)
    b.link(c1, a2)
    b.link(c2, e)
    b.link(f, b1)
    b.link(g, b2)
    return b.build()


def _destroy_bridge(d: Dessin, anchors) -> Dessin | None:
    if len(anchors) != 1:
        return None
    (x,) = anchors
    if not 0 <= x < d.n_darts:
        return None
    m1 = d.dvert[x]
    if not d.real_dart(x) or x != d.succ_dart(m1):
        return None
    m2 = d.target(x)
    if m1 == m2 or not _real(d, m1, "mono", 3) or not _real(d, m2, "mono", 3):
        return None
    if len(d.boundary[d.vcircle[m1]]) <= 2:
        return None
    i1, i2 = d.pred_dart(m1) + 1, d.pred_dart(m2) + 1
    f, g = d.mate[i1], d.mate[i2]
    if f == i2:
        return None
    p_succ, q_pred = d.mate[d.pred_dart(m1)], d.mate[d.succ_dart(m2)]
    b = MapBuilder.from_dessin(d)
    b.drop_vertex(m1)
    b.drop_vertex(m2)
    b.link(p_succ, q_pred)
    b.link(f, g)
    return b.build()


_IN_SHAPE = {"white": (3, 1), "black": (4, 2)}  # real degree, inner darts


def _x_in(d: Dessin, anchors, color: str) -> Dessin | None:
    if len(anchors) != 1:
        return None
    (x,) = anchors
    if not 0 <= x < d.n_darts:
        return None
    u = d.dvert[x]
    if x != d.pred_dart(u) or not _real(d, u, "mono", 3):
        return None
    deg = _IN_SHAPE[color][0]
    w1, w2 = d.target(d.pred_dart(u)), d.target(d.succ_dart(u))
    if len({u, w1, w2}) != 3 or not _real(d, w1, color, deg) or not _real(d, w2, color, deg):
        return None
    p_succ, q_pred = d.mate[d.pred_dart(w1)], d.mate[d.succ_dart(w2)]
    frag = {u, w1, w2}
    if d.dvert[p_succ] in frag or d.dvert[q_pred] in frag:
        return None
    mcolor = d.ecolor[p_succ]
    if d.ecolor[q_pred] != mcolor:
        return None
    outer = ([d.mate[i] for i in d.inner_darts(w1)] + [d.mate[d.pred_dart(u) + 1]]
             + [d.mate[i] for i in d.inner_darts(w2)])
    circle = d.vcircle[u]
    b = MapBuilder.from_dessin(d)
    for v in (w1, u, w2):
        b.drop_vertex(v)
    mp, mi, ms = _add_vertex(b, "mono", circle, [mcolor] * 3, 1)
    b.link(p_succ, mp)
    b.link(ms, q_pred)
    slots = [mcolor] + [d.ecolor[y] for y in outer]
    new = _add_vertex(b, color, -1, slots, 1)
    b.link(mi, new[0])
    for y, z in zip(outer, new[1:]):
        b.link(y, z)
    return b.build()


def _x_out(d: Dessin, anchors, color: str) -> Dessin | None:
    if len(anchors) != 1:
        return None
    (x,) = anchors
    if not 0 <= x < d.n_darts:
        return None
    m = d.dvert[x]
    if not _real(d, m, "mono", 3) or d.pos(x) != 1:
        return None
    w = d.target(x)
    k = _IN_SHAPE[color][1]
    if d.vcircle[w] >= 0 or d.vcolor[w] != color or d.degs[w] != 2 * k + 2:
        return None
    p_succ, q_pred = d.mate[d.pred_dart(m)], d.mate[d.succ_dart(m)]
    if d.dvert[p_succ] == m or d.dvert[q_pred] == m:
        return None
    ring = list(d.darts(w))
    start = ring.index(d.mate[x])
    ring = ring[start:] + ring[:start]
    outer = [d.mate[y] for y in ring[1:]]
    if any(d.dvert[y] == w for y in outer):
        return None
    left, mid, right = outer[:k], outer[k], outer[k + 1:]
    mcolor, ucolor = d.ecolor[x], d.ecolor[mid]
    circle = d.vcircle[m]
    b = MapBuilder.from_dessin(d)
    b.drop_vertex(m)
    b.drop_vertex(w)
    w1 = _add_vertex(b, color, circle, [mcolor] + [d.ecolor[y] for y in left] + [ucolor], 1)
    u = _add_vertex(b, "mono", circle, [ucolor] * 3, 1)
    w2 = _add_vertex(b, color, circle, [ucolor] + [d.ecolor[y] for y in right] + [mcolor], 1)
    b.link(p_succ, w1[0])
    for y, z in zip(left, w1[1:-1]):
        b.link(y, z)
    b.link(w1[-1], u[0])
    b.link(mid, u[1])
    b.link(u[2], w2[0])
    for y, z in zip(right, w2[1:-1]):
        b.link(y, z)
    b.link(w2[-1], q_pred)
    return b.build()


def _orientation(d: Dessin, x: int) -> int:
    """+1 when ``x`` is a predecessor dart, -1 for a successor dart, 0 otherwise."""
    v = d.dvert[x]
    if d.vcircle[v] < 0:
        return 0
    if x == d.pred_dart(v):
        return 1
    if x == d.succ_dart(v):
        return -1
    return 0


def _match_zigzag(d: Dessin, x: int):
    o = _orientation(d, x)
    if not o:
        return None
    vw = _View(d, o)
    bv = d.dvert[x]
    if not _real(d, bv, "black", 4) or _colors(d, vw.darts(bv)) != ["bold", "solid", "bold", "solid"]:
        return None
    x2 = vw.next(bv)
    if not _real(d, x2, "cross", 2) or _colors(d, vw.darts(x2)) != ["solid", "dotted"]:
        return None
    w = vw.next(x2)
    if not _real(d, w, "white", 3) or _colors(d, vw.darts(w)) != ["dotted", "bold", "dotted"]:
        return None
    x1 = vw.next(w)
    if not _real(d, x1, "cross", 2) or _colors(d, vw.darts(x1)) != ["dotted", "solid"]:
        return None
    ms = vw.next(x1)
    if not _real(d, ms, "mono", 3) or d.ecolor[d.pred_dart(ms)] != "solid":
        return None
    i1, i2 = vw.inner(bv)
    if d.mate[i1] != vw.inner(ms)[0] or d.mate[i2] != vw.inner(w)[0]:
        return None
    frag = {bv, x2, w, x1, ms}
    if len(frag) != 5:
        return None
    e_e, e_w = d.mate[vw.pred(bv)], d.mate[vw.succ(ms)]
    if d.dvert[e_e] in frag or d.dvert[e_w] in frag:
        return None
    return o, frag, e_e, e_w


def _match_straight(d: Dessin, x: int):
    o = _orientation(d, x)
    if not o:
        return None
    vw = _View(d, o)
    mb = d.dvert[x]
    if not _real(d, mb, "mono", 3) or d.ecolor[x] != "bold":
        return None
    w = vw.next(mb)
    if not _real(d, w, "white", 3) or _colors(d, vw.darts(w)) != ["bold", "dotted", "bold"]:
        return None
    bv = vw.next(w)
    if not _real(d, bv, "black", 4) or _colors(d, vw.darts(bv)) != ["bold", "solid", "bold", "solid"]:
        return None
    i1, i2 = vw.inner(bv)
    xv = d.target(i1)
    if d.vcircle[xv] >= 0 or d.vcolor[xv] != "cross" or d.degs[xv] != 2:
        return None
    other = [y for y in d.darts(xv) if y != d.mate[i1]][0]
    if d.mate[other] != vw.inner(w)[0] or d.mate[i2] != vw.inner(mb)[0]:
        return None
    frag = {mb, w, bv, xv}
    if len(frag) != 4:
        return None
    e_e, e_w = d.mate[vw.pred(mb)], d.mate[vw.succ(bv)]
    if d.dvert[e_e] in frag or d.dvert[e_w] in frag:
        return None
    return o, frag, e_e, e_w


def _straighten(d: Dessin, anchors) -> Dessin | None:
    if len(anchors) != 1 or not 0 <= anchors[0] < d.n_darts:
        return None
    hit = _match_zigzag(d, anchors[0])
    if hit is None:
        return None
    o, frag, e_e, e_w = hit
    circle = d.vcircle[d.dvert[anchors[0]]]
    b = MapBuilder.from_dessin(d)
    for v in sorted(frag):
        b.drop_vertex(v)
    mb = _add_vertex(b, "mono", circle, ["bold"] * 3, o)
    w = _add_vertex(b, "white", circle, ["bold", "dotted", "bold"], o)
    bv = _add_vertex(b, "black", circle, ["bold", "solid", "bold", "solid"], o)
    xv = _add_vertex(b, "cross", -1, ["dotted", "solid"], o)
    b.link(e_e, mb[0])
    b.link(mb[2], w[0])
    b.link(w[2], bv[0])
    b.link(bv[3], e_w)
    b.link(mb[1], bv[2])
    b.link(w[1], xv[0])
    b.link(bv[1], xv[1])
    return b.build()


def _create_zigzag(d: Dessin, anchors) -> Dessin | None:
    if len(anchors) != 1 or not 0 <= anchors[0] < d.n_darts:
        return None
    hit = _match_straight(d, anchors[0])
    if hit is None:
        return None
    o, frag, e_e, e_w = hit
    circle = d.vcircle[d.dvert[anchors[0]]]
    b = MapBuilder.from_dessin(d)
    for v in sorted(frag):
        b.drop_vertex(v)
    bv = _add_vertex(b, "black", circle, ["bold", "solid", "bold", "solid"], o)
    x2 = _add_vertex(b, "cross", circle, ["solid", "dotted"], o)
    w = _add_vertex(b, "white", circle, ["dotted", "bold", "dotted"], o)
    x1 = _add_vertex(b, "cross", circle, ["dotted", "solid"], o)
    ms = _add_vertex(b, "mono", circle, ["solid"] * 3, o)
    b.link(e_e, bv[0])
    b.link(bv[3], x2[0])
    b.link(x2[1], w[0])
    b.link(w[2], x1[0])
    b.link(x1[1], ms[0])
    b.link(ms[2], e_w)
    b.link(bv[1], ms[1])
    b.link(bv[2], w[1])
    return b.build()


_REWRITE = {
    "monochrome_modification": _mm,
    "create_bridge": _create_bridge,
    "destroy_bridge": _destroy_bridge,
    "white_in": lambda d, a: _x_in(d, a, "white"),
    "black_in": lambda d, a: _x_in(d, a, "black"),
    "white_out": lambda d, a: _x_out(d, a, "white"),
    "black_out": lambda d, a: _x_out(d, a, "black"),
    "straighten_zigzag": _straighten,
    "create_zigzag": _create_zigzag,
}


# ----------------------------------------------------------------------
# candidate anchors


def _candidates(d: Dessin, kinds: Iterable[str]) -> Iterator[tuple[str, tuple[int, ...]]]:
    kinds = set(kinds)
    if "monochrome_modification" in kinds or "create_bridge" in kinds:
        for fi in d.region_ids:
            walk = d.faces[fi]
            inner = [x for x in walk if not d.real_dart(x)]
            if "monochrome_modification" in kinds:
                for i, a in enumerate(inner):
                    for c in inner[i + 1:]:
                        if d.ecolor[a] == d.ecolor[c] and d.mate[a] != c:
                            yield "monochrome_modification", (min(a, c), max(a, c))
            if "create_bridge" in kinds:
                for e in walk:
                    if d.real_dart(e):
                        for f in inner:
                            if d.ecolor[f] == d.ecolor[e]:
                                yield "create_bridge", (e, f)
    for v in d.real_vertices():
        if d.vcolor[v] != "mono" or d.degs[v] != 3:
            continue
        if "destroy_bridge" in kinds and d.vcolor[d.target(d.succ_dart(v))] == "mono":
            yield "destroy_bridge", (d.succ_dart(v),)
        for color in ("white", "black"):
            if f"{color}_in" in kinds:
                yield f"{color}_in", (d.pred_dart(v),)
            if f"{color}_out" in kinds and d.vcolor[d.target(d.pred_dart(v) + 1)] == color:
                yield f"{color}_out", (d.pred_dart(v) + 1,)
    for kind in ("straighten_zigzag", "create_zigzag"):
        if kind in kinds:
            first = "black" if kind == "straighten_zigzag" else "mono"
            for v in d.real_vertices():
                if d.vcolor[v] == first:
                    yield kind, (d.pred_dart(v),)
                    yield kind, (d.succ_dart(v),)


def _attempt(d: Dessin, kind: str, anchors) -> Dessin | None:
    try:
        out = _REWRITE[kind](d, tuple(anchors))
    except DessinError:
        return None
    if out is None or validate(out):
        return None
    return out


def successors(d: Dessin, kinds: Iterable[str] = KINDS) -> list[tuple[MoveSite, Dessin]]:
    """All applicable sites together with their results, in deterministic order."""
    stamp = structure_stamp(d)
    out = []
    seen = set()
    for kind, anchors in _candidates(d, kinds):
        if (kind, anchors) in seen:
            continue
        seen.add((kind, anchors))
        res = _attempt(d, kind, anchors)
        if res is not None:
            out.append((MoveSite(kind, anchors, _site_color(d, kind, anchors), stamp), res))
    return out


def _site_color(d: Dessin, kind: str, anchors) -> str | None:
    if kind in ("monochrome_modification", "create_bridge", "destroy_bridge"):
        return d.ecolor[anchors[0]]
    if kind in ("white_in", "black_in", "white_out", "black_out"):
        return d.ecolor[anchors[0]]
    return None


def applicable_moves(d: Dessin, kinds: Iterable[str] = KINDS) -> list[MoveSite]:
    return [s for s, _ in successors(d, kinds)]


def apply(d: Dessin, m: MoveSite) -> Dessin:
    """Perform a move; raises :class:`PatternMismatch` when the site does not fit."""
    if m.kind not in _REWRITE:
        raise PatternMismatch(f"unknown move kind {m.kind!r}")
    if m.stamp is not None and m.stamp != structure_stamp(d):
        raise PatternMismatch("stale site: the dessin changed since the site was listed")
    try:
        out = _REWRITE[m.kind](d, tuple(m.anchors))
    except DessinError:
        out = None
    if out is None:
        raise PatternMismatch(f"{m.line()}: local pattern not found")
    report = validate(out)
    if report:
        raise PatternMismatch(f"{m.line()}: the rewrite is not admissible here ({report[0]})")
    return out


def replay(d: Dessin, moves: Iterable[MoveSite]) -> Dessin:
    for m in moves:
        d = apply(d, MoveSite(m.kind, m.anchors, m.color))
    return d


def inverse_site(before: Dessin, after: Dessin) -> MoveSite | None:
    """A site of ``after`` whose move returns to the class of ``before``."""
    target = canonical_code(before)
    for s, res in successors(after):
        if canonical_code(res) == target:
            return s
    return None


# ----------------------------------------------------------------------
# normal forms


def bridges(d: Dessin) -> list[int]:
    """Successor darts of the real edges that are bridges."""
    out = []
    for c, seq in enumerate(d.boundary):
        if len(seq) <= 2:
            continue
        for v in seq:
            x = d.succ_dart(v)
            if d.vcolor[v] == "mono" and d.vcolor[d.target(x)] == "mono":
                out.append(x)
    return out


def bridge_free_normalize(d: Dessin) -> tuple[Dessin, list[MoveSite]]:
    """Destroy bridges until none is left; returns the result and the witness."""
    witness: list[MoveSite] = []
    while True:
        done = True
        for x in bridges(d):
            res = _attempt(d, "destroy_bridge", (x,))
            if res is not None:
                witness.append(MoveSite("destroy_bridge", (x,), d.ecolor[x], structure_stamp(d)))
                d = res
                done = False
                break
        if done:
            return d, witness


def _inner_bw(d: Dessin) -> int:
    return sum(1 for v in d.inner_vertices() if d.vcolor[v] in ("black", "white"))


def is_peripheral(d: Dessin) -> bool:
    return all(d.vcolor[v] == "cross" for v in d.inner_vertices())


def peripheral_normalize(d: Dessin, budget: EquivalenceBudget | None = None):
    """Search elementary moves for a dessin whose inner vertices are all crosses.

    Returns ``(dessin, witness)`` or ``None`` when the budget runs out.
    """
    budget = budget or EquivalenceBudget()
    if is_peripheral(d):
        return d, []
    cap = budget.max_vertices or 3 * d.n_vertices
    start = canonical_code(d)
    seen = {start}
    frontier = [(d, [])]
    states = 1
    for _depth in range(budget.max_depth):
        frontier.sort(key=lambda t: _inner_bw(t[0]))
        nxt = []
        for cur, path in frontier:
            for s, res in successors(cur, ELEMENTARY_KINDS):
                if res.n_vertices > cap:
                    continue
                code = canonical_code(res)
                if code in seen:
                    continue
                seen.add(code)
                states += 1
                if is_peripheral(res):
                    return res, path + [s]
                if states >= budget.max_states:
                    return None
                nxt.append((res, path + [s]))
        if not nxt:
            return None
        # keep the most promising states first
        nxt.sort(key=lambda t: (_inner_bw(t[0]), t[0].n_vertices))
        frontier = nxt[: max(50, budget.max_states // max(1, budget.max_depth))]
    return None


# ----------------------------------------------------------------------
# equivalence


@dataclass
class EquivalenceResult:
    verdict: str  # "yes", "no" or "unknown"
    moves: list[MoveSite] = field(default_factory=list)
    invariant: str | None = None
    states: int = 0

    def __bool__(self) -> bool:
        return self.verdict == "yes"

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "invariant": self.invariant, "states": self.states,
                "moves": [m.line() for m in self.moves]}


def separating_invariant(d1: Dessin, d2: Dessin, allow_weak: bool) -> str | None:
    from .structure import invariant_vector

    v1, v2 = invariant_vector(d1), invariant_vector(d2)
    names = ["degree", "hyperbolic", "type", "ovals", "node"]
    if not allow_weak:
        names.insert(2, "zigzags")
    for name in names:
        if v1[name] != v2[name]:
            return name
    return None


def equivalent(d1: Dessin, d2: Dessin, allow_weak: bool = False,
               budget: EquivalenceBudget | None = None, threads: int = 1) -> EquivalenceResult:
    """Bidirectional breadth-first search over canonical codes."""
    budget = budget or EquivalenceBudget()
    inv = separating_invariant(d1, d2, allow_weak)
    if inv is not None:
        return EquivalenceResult("no", invariant=inv)
    c1, c2 = canonical_code(d1), canonical_code(d2)
    if c1 == c2:
        return EquivalenceResult("yes", [], states=1)
    kinds = KINDS if allow_weak else ELEMENTARY_KINDS
    cap = budget.max_vertices or 3 * max(d1.n_vertices, d2.n_vertices)
    # code -> (dessin, parent code, site, depth)
    sides = [{c1: (d1, None, None, 0)}, {c2: (d2, None, None, 0)}]
    fronts = [[c1], [c2]]
    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        while fronts[0] and fronts[1]:
            s = 0 if len(fronts[0]) <= len(fronts[1]) else 1
            seen, other = sides[s], sides[1 - s]
            depth = seen[fronts[s][0]][3]
            if depth >= budget.max_depth:
                fronts[s] = []
                continue
            states = [seen[c][0] for c in fronts[s]]
            expand = (pool.map(lambda x: successors(x, kinds), states) if pool
                      else map(lambda x: successors(x, kinds), states))
            nxt = []
            for code, succ in zip(fronts[s], expand):
                for site, res in succ:
                    if res.n_vertices > cap:
                        continue
                    rc = canonical_code(res)
                    if rc in seen:
                        continue
                    seen[rc] = (res, code, site, depth + 1)
                    if rc in other:
                        moves = _stitch(sides, s, rc)
                        return EquivalenceResult("yes", moves, states=len(sides[0]) + len(sides[1]))
                    nxt.append(rc)
                    if len(sides[0]) + len(sides[1]) >= budget.max_states:
                        return EquivalenceResult("unknown", states=len(sides[0]) + len(sides[1]))
            fronts[s] = nxt
    finally:
        if pool:
            pool.shutdown()
    return EquivalenceResult("unknown", states=len(sides[0]) + len(sides[1]))


def _path(side: dict, code) -> list[tuple[Dessin, MoveSite]]:
    out = []
    while True:
        dz, parent, site, _ = side[code]
        if parent is None:
            break
        out.append((side[parent][0], site))
        code = parent
    out.reverse()
    return out


def _stitch(sides, s, meet) -> list[MoveSite]:
    """Move list from the first input to (a copy of) the second through ``meet``."""
    left, right = sides[0], sides[1]
    moves = [site for _, site in _path(left, meet)]
    cur = left[meet][0]
    back = _path(right, meet)
    # walk the second side backwards by inverting each move
    for before, _site in reversed(back):
        target = canonical_code(before)
        step = None
        for site, res in successors(cur):
            if canonical_code(res) == target:
                step = (site, res)
                break
        if step is None:
            raise ValidityBroken("could not invert a move of the search tree")
        moves.append(step[0])
        cur = step[1]
    return moves


def zigzag_delta(m: MoveSite) -> int:
    return {"straighten_zigzag": -1, "create_zigzag": 1}.get(m.kind, 0)


def check_conservation(before: Dessin, m: MoveSite, after: Dessin) -> list[str]:
    """Integer invariants a move must conserve; returns the violated ones."""
    from .core import color_sums

    bad = []
    if color_sums(before) != color_sums(after):
        bad.append("weighted index sums")
    try:
        if degree(before) != degree(after):
            bad.append("degree")
    except DessinError:
        bad.append("degree")
    zb, za = boundary_profile(before).zigzags, boundary_profile(after).zigzags
    if za - zb != zigzag_delta(m):
        bad.append("zigzag count")
    return bad


__all__ = [
    "KINDS", "ELEMENTARY_KINDS", "WEAK_KINDS", "INVERSE", "MoveSite", "EquivalenceBudget",
    "EquivalenceResult", "applicable_moves", "apply", "successors", "replay", "inverse_site",
    "bridges", "bridge_free_normalize", "peripheral_normalize", "is_peripheral", "equivalent",
    "separating_invariant", "structure_stamp", "read_script", "write_script",
    "check_conservation", "zigzag_delta",
]
