"""Combinatorial maps carrying real dessins.

A dessin is stored as a rotation system.  Every vertex owns a contiguous
block of dart ids listed in counter-clockwise order; for a real vertex the
block starts with the dart pointing to its boundary predecessor and ends
with the dart pointing to its boundary successor, so the real edges of a
vertex are the first and last entries of its block.  Boundary circles are
traversed with the interior on the right.  Capping every boundary circle by
a *hole* face turns the dessin into a map on a closed surface, and the faces
of that map other than the holes are the regions.

Edge directions are never stored.  A region is positive when its
counter-clockwise boundary walk reads black, white, cross cyclically, and
every edge is directed along the walk of its positive side.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

from .errors import ColorSumMismatch, InvalidDessin

EDGE_COLORS = ("solid", "bold", "dotted")
VERTEX_COLORS = ("black", "white", "cross", "mono")
ESSENTIAL = ("black", "white", "cross")
EDGE_RANK = {c: i for i, c in enumerate(EDGE_COLORS)}
VERTEX_RANK = {c: i for i, c in enumerate(VERTEX_COLORS)}

#: edge colors allowed at each essential vertex color
INCIDENT = {
    "black": frozenset({"solid", "bold"}),
    "white": frozenset({"bold", "dotted"}),
    "cross": frozenset({"dotted", "solid"}),
}
#: color of an edge joining two essential vertex colors
JOIN = {
    frozenset({"black", "white"}): "bold",
    frozenset({"white", "cross"}): "dotted",
    frozenset({"cross", "black"}): "solid",
}
#: successor along the walk of a positive region
POSITIVE_NEXT = {"black": "white", "white": "cross", "cross": "black"}
#: the two essential colors an edge color runs between, in positive order
EDGE_ENDS = {"bold": ("black", "white"), "dotted": ("white", "cross"), "solid": ("cross", "black")}


@dataclass(frozen=True)
class SurfaceSpec:
    """Topological type of the compact surface a dessin lives on."""

    orientable: bool = True
    genus: int = 0
    boundary_circles: int = 1

    @property
    def euler(self) -> int:
        if self.orientable:
            return 2 - 2 * self.genus - self.boundary_circles
        return 2 - self.genus - self.boundary_circles

    def token(self) -> str:
        kind = "orientable" if self.orientable else "nonorientable"
        return f"{kind}:{self.genus}:{self.boundary_circles}"


DISK = SurfaceSpec()
SPHERE = SurfaceSpec(True, 0, 0)


@dataclass(frozen=True)
class Dessin:
    """Immutable rotation-system presentation of a (real) trichotomic graph.

    Parameters
    ----------
    surface
        Topological type of the surface.
    vcolor
        Color of each vertex: ``black``, ``white``, ``cross`` or ``mono``.
    vcircle
        Boundary circle of each vertex, ``-1`` for inner vertices.
    degs
        Number of darts of each vertex.  The darts of vertex ``v`` are the
        consecutive ids ``offset(v), ..., offset(v) + degs[v] - 1``.
    mate
        Involution pairing the two darts of every edge.
    ecolor
        Edge color carried by each dart.
    boundary
        For each boundary circle, its vertices in traversal order.
    pin
        Optional dart whose left region is asserted positive.
    """

    surface: SurfaceSpec
    vcolor: tuple[str, ...]
    vcircle: tuple[int, ...]
    degs: tuple[int, ...]
    mate: tuple[int, ...]
    ecolor: tuple[str, ...]
    boundary: tuple[tuple[int, ...], ...]
    pin: int | None = None

    # -- basic layout -------------------------------------------------

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for k in self.degs:
            out.append(acc)
            acc += k
        return tuple(out)

    @cached_property
    def dvert(self) -> tuple[int, ...]:
        out = []
        for v, k in enumerate(self.degs):
            out.extend([v] * k)
        return tuple(out)

    @property
    def n_vertices(self) -> int:
        return len(self.degs)

    @property
    def n_darts(self) -> int:
        return len(self.mate)

    def darts(self, v: int) -> range:
        o = self.offsets[v]
        return range(o, o + self.degs[v])

    def pos(self, d: int) -> int:
        return d - self.offsets[self.dvert[d]]

    def is_real(self, v: int) -> bool:
        return self.vcircle[v] >= 0

    @cached_property
    def real_flags(self) -> tuple[bool, ...]:
        out = [False] * len(self.mate)
        for v, o in enumerate(self.offsets):
            if self.vcircle[v] >= 0 and self.degs[v]:
                out[o] = out[o + self.degs[v] - 1] = True
        return tuple(out)

    def real_dart(self, d: int) -> bool:
        return self.real_flags[d]

    def pred_dart(self, v: int) -> int:
        return self.offsets[v]

    def succ_dart(self, v: int) -> int:
        return self.offsets[v] + self.degs[v] - 1

    def inner_darts(self, v: int) -> range:
        o, k = self.offsets[v], self.degs[v]
        if self.vcircle[v] >= 0:
            return range(o + 1, o + k - 1)
        return range(o, o + k)

    def sigma(self, d: int) -> int:
        v = self.dvert[d]
        o = self.offsets[v]
        return o + (d - o + 1) % self.degs[v]

    def sigma_inv(self, d: int) -> int:
        v = self.dvert[d]
        o = self.offsets[v]
        return o + (d - o - 1) % self.degs[v]

    def face_next(self, d: int) -> int:
        return self.sigma_inv(self.mate[d])

    def target(self, d: int) -> int:
        return self.dvert[self.mate[d]]

    def color_of(self, v: int) -> str:
        """Vertex color, resolving monochrome vertices to their edge color."""
        c = self.vcolor[v]
        if c == "mono" and self.degs[v]:
            return self.ecolor[self.offsets[v]]
        return c

    def index(self, v: int) -> int:
        k = self.degs[v]
        return k - 1 if self.vcircle[v] >= 0 else k // 2

    def edges(self) -> list[tuple[int, int]]:
        return [(d, m) for d, m in enumerate(self.mate) if d < m]

    def is_inner_edge(self, d: int) -> bool:
        return not self.real_dart(d)

    # -- faces --------------------------------------------------------

    @cached_property
    def faces(self) -> tuple[tuple[int, ...], ...]:
        offs, degs, dvert, mate = self.offsets, self.degs, self.dvert, self.mate
        nxt = []
        for m in mate:
            v = dvert[m]
            o = offs[v]
            nxt.append(o + (m - o - 1) % degs[v])
        seen = [False] * len(mate)
        out = []
        for d0 in range(len(mate)):
            if seen[d0]:
                continue
            walk, d = [], d0
            while not seen[d]:
                seen[d] = True
                walk.append(d)
                d = nxt[d]
            out.append(tuple(walk))
        return tuple(out)

    @cached_property
    def face_of(self) -> tuple[int, ...]:
        out = [0] * self.n_darts
        for i, f in enumerate(self.faces):
            for d in f:
                out[d] = i
        return tuple(out)

    @cached_property
    def hole_faces(self) -> frozenset[int]:
        holes = set()
        for i, f in enumerate(self.faces):
            if all(self.real_flags[d] and d - self.offsets[self.dvert[d]] == self.degs[self.dvert[d]] - 1
                   for d in f):
                holes.add(i)
        return frozenset(holes)

    @cached_property
    def region_ids(self) -> tuple[int, ...]:
        return tuple(i for i in range(len(self.faces)) if i not in self.hole_faces)

    def essential_cycle(self, face: int) -> tuple[str, ...]:
        return tuple(self.vcolor[self.dvert[d]] for d in self.faces[face]
                     if self.vcolor[self.dvert[d]] != "mono")

    @cached_property
    def face_signs(self) -> tuple[int, ...]:
        """Sign of each face (+1, -1), 0 for holes and for faces that fit neither pattern."""
        out = []
        for i, f in enumerate(self.faces):
            if i in self.hole_faces:
                out.append(0)
                continue
            ess = self.essential_cycle(i)
            out.append(_cycle_sign(ess))
        return tuple(out)

    def direction(self, d: int) -> int:
        """+1 when the edge of ``d`` points away from the vertex of ``d``."""
        s = self.face_signs[self.face_of[d]]
        if s:
            return s
        return -self.face_signs[self.face_of[self.mate[d]]]

    # -- convenience --------------------------------------------------

    def real_vertices(self) -> list[int]:
        return [v for v in range(self.n_vertices) if self.vcircle[v] >= 0]

    def inner_vertices(self) -> list[int]:
        return [v for v in range(self.n_vertices) if self.vcircle[v] < 0]

    def boundary_edges(self, circle: int) -> list[tuple[int, str, int]]:
        """Real edges of a circle as ``(vertex, color, next_vertex)`` in traversal order."""
        seq = self.boundary[circle]
        return [(v, self.ecolor[self.succ_dart(v)], self.target(self.succ_dart(v))) for v in seq]

    def census(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for v in range(self.n_vertices):
            key = f"{'real' if self.vcircle[v] >= 0 else 'inner'}_{self.vcolor[v]}"
            out[key] = out.get(key, 0) + 1
        return out

    def mirror(self) -> "Dessin":
        """The same dessin seen in a mirror (all rotations reversed)."""
        b = MapBuilder.from_dessin(self)
        for v in b.rot:
            b.rot[v].reverse()
        b.starts = {c: seq[0] for c, seq in enumerate(self.boundary)}
        b.pin = None  # mirroring flips every region sign
        return b.build()


def _cycle_sign(ess: Sequence[str]) -> int:
    if not ess or len(ess) % 3:
        return 0
    fwd = bwd = True
    n = len(ess)
    for i in range(n):
        a, b = ess[i], ess[(i + 1) % n]
        fwd = fwd and POSITIVE_NEXT[a] == b
        bwd = bwd and POSITIVE_NEXT[b] == a
    if fwd:
        return 1
    if bwd:
        return -1
    return 0


# ----------------------------------------------------------------------
# construction


class MapBuilder:
    """Mutable scratch space used to assemble or rewrite dessins.

    Vertices and darts are addressed by integer keys that need not be
    contiguous; :meth:`build` renumbers them.  Vertices keep their relative
    key order, so rewriting a dessin preserves the ids of untouched vertices
    up to compaction.
    """

    def __init__(self, surface: SurfaceSpec = DISK):
        self.surface = surface
        self.vcolor: dict[int, str] = {}
        self.vcircle: dict[int, int] = {}
        self.rot: dict[int, list[int]] = {}
        self.mate: dict[int, int] = {}
        self.ecolor: dict[int, str] = {}
        self.dvert: dict[int, int] = {}
        self.starts: dict[int, int] = {}
        self.pin: int | None = None
        self._nv = 0
        self._nd = 0

    @classmethod
    def from_dessin(cls, d: Dessin) -> "MapBuilder":
        b = cls(d.surface)
        for v in range(d.n_vertices):
            b.vcolor[v] = d.vcolor[v]
            b.vcircle[v] = d.vcircle[v]
            b.rot[v] = list(d.darts(v))
        for x in range(d.n_darts):
            b.mate[x] = d.mate[x]
            b.ecolor[x] = d.ecolor[x]
            b.dvert[x] = d.dvert[x]
        b.starts = {c: seq[0] for c, seq in enumerate(d.boundary) if seq}
        b.pin = d.pin
        b._nv = d.n_vertices
        b._nd = d.n_darts
        return b

    def add_vertex(self, color: str, circle: int = -1) -> int:
        v = self._nv
        self._nv += 1
        self.vcolor[v] = color
        self.vcircle[v] = circle
        self.rot[v] = []
        return v

    def new_dart(self, v: int, color: str, at: int | None = None) -> int:
        x = self._nd
        self._nd += 1
        self.ecolor[x] = color
        self.dvert[x] = v
        if at is None:
            self.rot[v].append(x)
        else:
            self.rot[v].insert(at, x)
        return x

    def link(self, a: int, b: int) -> None:
        self.mate[a] = b
        self.mate[b] = a

    def edge(self, u: int, v: int, color: str, at_u: int | None = None,
             at_v: int | None = None) -> tuple[int, int]:
        a = self.new_dart(u, color, at_u)
        b = self.new_dart(v, color, at_v)
        self.link(a, b)
        return a, b

    def drop_dart(self, x: int) -> None:
        v = self.dvert.pop(x)
        self.rot[v].remove(x)
        self.mate.pop(x, None)
        self.ecolor.pop(x, None)

    def drop_vertex(self, v: int) -> None:
        for x in list(self.rot[v]):
            self.drop_dart(x)
        del self.rot[v], self.vcolor[v], self.vcircle[v]

    def build(self) -> Dessin:
        order = sorted(self.rot)
        vid = {v: i for i, v in enumerate(order)}
        did: dict[int, int] = {}
        owner: list[int] = []
        for v in order:
            for x in self.rot[v]:
                did[x] = len(did)
                owner.append(vid[v])
        try:
            mate = [0] * len(did)
            ecolor = [""] * len(did)
            for x, i in did.items():
                mate[i] = did[self.mate[x]]
                ecolor[i] = self.ecolor[x]
        except KeyError as exc:
            raise InvalidDessin("dangling dart reference", [f"dart {exc.args[0]} has no mate"]) from None
        degs = tuple(len(self.rot[v]) for v in order)
        vcircle = tuple(self.vcircle[v] for v in order)
        vcolor = tuple(self.vcolor[v] for v in order)
        offsets = []
        acc = 0
        for k in degs:
            offsets.append(acc)
            acc += k
        boundary = []
        for c in range(self.surface.boundary_circles):
            members = [i for i, cc in enumerate(vcircle) if cc == c]
            if not members:
                boundary.append(())
                continue
            start = self.starts.get(c)
            start = vid[start] if start in vid and vcircle[vid[start]] == c else members[0]
            seq = [start]
            seen = {start}
            while True:
                if degs[seq[-1]] < 2:
                    break
                succ = offsets[seq[-1]] + degs[seq[-1]] - 1
                nxt = owner[mate[succ]]
                if nxt == start or nxt in seen or vcircle[nxt] != c:
                    break
                seq.append(nxt)
                seen.add(nxt)
            boundary.append(tuple(seq))
        pin = did.get(self.pin) if self.pin is not None else None
        return Dessin(self.surface, vcolor, vcircle, degs, tuple(mate), tuple(ecolor),
                      tuple(boundary), pin)


# ----------------------------------------------------------------------
# validation


def validate(d: Dessin) -> list[str]:
    """Return the list of violated axioms; an empty list means ``d`` is a dessin."""
    out: list[str] = []
    n = d.n_darts
    rf = d.real_flags
    # pairing
    for x in range(n):
        m = d.mate[x]
        if not 0 <= m < n or m == x or d.mate[m] != x:
            out.append(f"pairing: dart {x} is not paired by a fixed-point-free involution")
            return out
        if d.ecolor[x] != d.ecolor[m]:
            out.append(f"pairing: edge at dart {x} changes color")
        if d.ecolor[x] not in EDGE_COLORS:
            out.append(f"pairing: unknown edge color {d.ecolor[x]!r}")
            return out
        if rf[x] != rf[m]:
            out.append(f"boundary: dart {x} joins a boundary dart to an inner dart")
    if out:
        return out
    # boundary circles
    for c in range(d.surface.boundary_circles):
        seq = d.boundary[c] if c < len(d.boundary) else ()
        members = [v for v in range(d.n_vertices) if d.vcircle[v] == c]
        if not seq or not members:
            out.append(f"boundary circle uncovered: circle {c} carries no vertex")
            continue
        if sorted(seq) != sorted(members):
            out.append(f"boundary circle uncovered: circle {c} is not a single cycle of real edges")
            continue
        for i, v in enumerate(seq):
            w = seq[(i + 1) % len(seq)]
            if d.degs[v] < 2:
                out.append(f"boundary: real vertex v{v} lacks boundary darts")
                break
            if d.mate[d.succ_dart(v)] != d.pred_dart(w):
                out.append(f"boundary: rotation at v{v} inconsistent with boundary order")
                break
    for v in range(d.n_vertices):
        if d.vcircle[v] >= d.surface.boundary_circles:
            out.append(f"boundary: v{v} lies on a missing circle")
    if out:
        return out
    # vertex axioms
    for v in range(d.n_vertices):
        col, k = d.vcolor[v], d.degs[v]
        cols = [d.ecolor[x] for x in d.darts(v)]
        if col == "mono":
            if k < 3:
                out.append(f"monochrome vertex incident to at least 3 edges: v{v}")
            if len(set(cols)) > 1:
                out.append(f"monochrome vertex with edges of one color: v{v}")
            continue
        if col not in INCIDENT:
            out.append(f"unknown vertex color at v{v}")
            continue
        if k < 2:
            out.append(f"essential vertex incident to at least 2 edges: v{v}")
        if not set(cols) <= INCIDENT[col]:
            out.append(f"color incidence: v{v} ({col}) carries {sorted(set(cols) - INCIDENT[col])}")
            continue
        cyclic = d.vcircle[v] < 0
        pairs = zip(cols, cols[1:] + (cols[:1] if cyclic else []))
        if any(a == b for a, b in pairs):
            out.append(f"color alternation: v{v} ({col})")
    if out:
        return out
    # regions, orientation, admissibility
    signs = d.face_signs
    for i in d.region_ids:
        f = d.faces[i]
        if signs[i] == 0:
            out.append(f"region pattern: region {i} does not read (black, white, cross)^k")
            continue
        ess_pos = [j for j, x in enumerate(f) if d.vcolor[d.dvert[x]] != "mono"]
        for a, b in zip(ess_pos, ess_pos[1:] + ess_pos[:1]):
            need = JOIN[frozenset({d.vcolor[d.dvert[f[a]]], d.vcolor[d.dvert[f[b]]]})]
            j = a
            while True:
                if d.ecolor[f[j]] != need:
                    out.append(f"region pattern: region {i} has a {d.ecolor[f[j]]} edge where {need} is required")
                    break
                j = (j + 1) % len(f)
                if j == b:
                    break
    if out:
        return out
    for x in range(n):
        if rf[x]:
            continue
        if signs[d.face_of[x]] == signs[d.face_of[d.mate[x]]]:
            out.append(f"orientation: both sides of the edge at dart {x} have the same sign")
            break
    if d.pin is not None and signs[d.face_of[d.pin]] != 1:
        out.append("orientation: pinned region is not positive")
    if _has_mono_cycle(d):
        out.append("admissibility: directed monochrome cycle")
    # topology
    if not _connected(d):
        out.append("connectivity: the graph is disconnected")
    elif d.surface.orientable:
        chi = d.n_vertices - n // 2 + len(d.region_ids)
        if chi != d.surface.euler or len(d.hole_faces) != d.surface.boundary_circles:
            out.append(f"region disk: Euler count {chi} differs from the surface value {d.surface.euler}")
    else:
        out.append("surface: non-orientable surfaces are not supported by the rotation-system model")
    return out


def is_valid(d: Dessin) -> bool:
    return not validate(d)


def require_valid(d: Dessin, what: str = "dessin") -> Dessin:
    rep = validate(d)
    if rep:
        raise InvalidDessin(f"{what} is not a valid dessin", rep)
    return d


def _connected(d: Dessin) -> bool:
    if d.n_vertices == 0:
        return False
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for x in d.darts(v):
            w = d.target(x)
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == d.n_vertices


def _has_mono_cycle(d: Dessin) -> bool:
    succ: dict[int, list[int]] = {}
    for x in range(d.n_darts):
        u, w = d.dvert[x], d.target(x)
        if d.vcolor[u] == "mono" and d.vcolor[w] == "mono" and d.direction(x) == 1:
            succ.setdefault(u, []).append(w)
    state: dict[int, int] = {}
    for s in succ:
        if state.get(s):
            continue
        stack = [(s, iter(succ.get(s, ())))]
        state[s] = 1
        while stack:
            v, it = stack[-1]
            for w in it:
                st = state.get(w, 0)
                if st == 1:
                    return True
                if st == 0:
                    state[w] = 1
                    stack.append((w, iter(succ.get(w, ()))))
                    break
            else:
                state[v] = 2
                stack.pop()
    return False


# ----------------------------------------------------------------------
# invariants


@dataclass(frozen=True)
class Region:
    walk: tuple[int, ...]
    colors: tuple[str, ...]
    sign: int


def regions(d: Dessin) -> list[Region]:
    return [Region(d.faces[i], d.essential_cycle(i), d.face_signs[i]) for i in d.region_ids]


def index(d: Dessin, v: int) -> int:
    return d.index(v)


def singular_vertices(d: Dessin) -> list[int]:
    out = []
    for v in range(d.n_vertices):
        c, k = d.vcolor[v], d.index(v)
        if (c == "black" and k % 3) or (c == "white" and k % 2) or (c == "cross" and k >= 2):
            out.append(v)
    return out


def is_reduced(d: Dessin) -> bool:
    for v in range(d.n_vertices):
        c, k = d.vcolor[v], d.index(v)
        if c == "black" and k > 3 or c == "white" and k > 2:
            return False
        if c == "mono" and (d.vcircle[v] < 0 or d.degs[v] != 3):
            return False
    return True


def weighted_sum(d: Dessin, color: str) -> int:
    return sum(d.index(v) * (1 if d.vcircle[v] >= 0 else 2)
               for v in range(d.n_vertices) if d.vcolor[v] == color)


def color_sums(d: Dessin) -> dict[str, int]:
    return {c: weighted_sum(d, c) for c in ESSENTIAL}


def degree(d: Dessin) -> int:
    """Degree of the dessin; all three essential colors must agree."""
    s = color_sums(d)
    if s["cross"] % 2 or len(set(s.values())) != 1:
        raise ColorSumMismatch(f"weighted index sums disagree: {s}")
    return s["cross"] // 2


def nodes(d: Dessin) -> list[int]:
    return [v for v in range(d.n_vertices) if d.vcolor[v] == "cross" and d.index(v) == 2]


@dataclass(frozen=True)
class Segment:
    """A maximal run of equally colored real edges on a boundary circle."""

    circle: int
    color: str
    vertices: tuple[int, ...]
    whites: int
    nodal: bool

    @property
    def kind(self) -> str:
        if self.color != "dotted":
            return self.color
        if self.nodal:
            return "nodal"
        return "oval" if self.whites % 2 == 0 else "zigzag"


@dataclass(frozen=True)
class BoundaryProfile:
    segments: tuple[Segment, ...]
    monochrome_circles: tuple[tuple[int, str], ...]
    ovals: int
    zigzags: int
    hyperbolic: int

    def to_dict(self) -> dict:
        return {
            "ovals": self.ovals,
            "zigzags": self.zigzags,
            "hyperbolic_components": self.hyperbolic,
            "segments": [
                {"circle": s.circle, "color": s.color, "kind": s.kind, "whites": s.whites,
                 "vertices": list(s.vertices)}
                for s in self.segments
            ],
            "monochrome_circles": [list(c) for c in self.monochrome_circles],
        }


def boundary_profile(d: Dessin) -> BoundaryProfile:
    segs: list[Segment] = []
    circles: list[tuple[int, str]] = []
    for c, seq in enumerate(d.boundary):
        cols = [d.ecolor[d.succ_dart(v)] for v in seq]
        n = len(seq)
        if len(set(cols)) == 1:
            circles.append((c, cols[0]))
            continue
        start = next(i for i in range(n) if cols[i] != cols[i - 1])
        i = start
        while True:
            col = cols[i]
            verts = [seq[i]]
            j = i
            while cols[(j + 1) % n] == col and (j + 1) % n != start:
                j = (j + 1) % n
                verts.append(seq[j])
            verts.append(seq[(j + 1) % n])
            interior = verts[1:-1]
            whites = sum(1 for v in interior if d.vcolor[v] == "white")
            nodal = any(d.vcolor[v] == "cross" and d.index(v) % 2 == 0 for v in interior)
            segs.append(Segment(c, col, tuple(verts), whites, nodal))
            i = (j + 1) % n
            if i == start:
                break
    ovals = sum(1 for s in segs if s.kind == "oval")
    zigzags = sum(1 for s in segs if s.kind == "zigzag")
    hyper = sum(1 for _, col in circles if col == "dotted")
    return BoundaryProfile(tuple(segs), tuple(circles), ovals, zigzags, hyper)


def zigzag_count(d: Dessin) -> int:
    return boundary_profile(d).zigzags


def is_hyperbolic(d: Dessin) -> bool:
    prof = boundary_profile(d)
    return bool(prof.monochrome_circles) and all(c == "dotted" for _, c in prof.monochrome_circles) \
        and not prof.segments


# ----------------------------------------------------------------------
# canonical code


def _dart_kinds(d: Dessin) -> list[int]:
    out = [0] * d.n_darts
    for v in d.real_vertices():
        out[d.pred_dart(v)] = 1
        out[d.succ_dart(v)] = 2
    return out


def canonical_code(d: Dessin) -> bytes:
    """Isomorphism-invariant byte encoding (reflections allowed).

    The encoding is a breadth-first dart numbering started from a boundary
    dart; the lexicographically least encoding over all admissible roots and
    both orientations wins.  Roots are first filtered by a cheap local
    signature that is itself invariant, which keeps the search small.
    """
    n = d.n_darts
    mate = d.mate
    vrank = [VERTEX_RANK[c] for c in d.vcolor]
    erank = [EDGE_RANK[c] for c in d.ecolor]
    kinds = _dart_kinds(d)
    dvert = d.dvert
    offs, degs = d.offsets, d.degs
    base = [vrank[dvert[x]] * 64 + erank[x] * 16 for x in range(n)]
    nxt = [offs[dvert[x]] + (x - offs[dvert[x]] + 1) % degs[dvert[x]] for x in range(n)]
    prv = [offs[dvert[x]] + (x - offs[dvert[x]] - 1) % degs[dvert[x]] for x in range(n)]

    candidates = []
    for mirror in (False, True):
        sig = prv if mirror else nxt
        kind = [(3 - k if k else 0) for k in kinds] if mirror else kinds
        attr = [base[x] + kind[x] * 4 for x in range(n)]
        roots = [x for x in range(n) if kind[x] == 1] or list(range(n))
        for r in roots:
            key = _local_key(r, sig, mate, attr)
            candidates.append((key, mirror, r, sig, attr))
    best_key = min(c[0] for c in candidates)
    best: list[int] | None = None
    for key, _mirror, r, sig, attr in candidates:
        if key != best_key:
            continue
        code = _encode(r, sig, mate, attr, n, best)
        if code is not None and (best is None or code < best):
            best = code
    if best is None:
        raise InvalidDessin("canonical code needs a connected map")
    header = f"{d.surface.token()}|{n}|".encode()
    return header + b"".join(x.to_bytes(2, "big") for x in best)


def _local_key(r, sig, mate, attr, depth=6):
    out = []
    x = r
    for _ in range(depth):
        out.append(attr[x])
        out.append(attr[mate[x]])
        x = sig[mate[x]]
    return tuple(out)


def _encode(root, sig, mate, attr, n, bound):
    label = {root: 0}
    order = [root]
    code: list[int] = []
    i = 0
    tight = bound is not None
    while i < len(order):
        x = order[i]
        i += 1
        for y in (sig[x], mate[x]):
            if y not in label:
                label[y] = len(order)
                order.append(y)
        chunk = (label[sig[x]], label[mate[x]], attr[x])
        if tight:
            k = len(code)
            for j, val in enumerate(chunk):
                b = bound[k + j]
                if val < b:
                    tight = False
                    break
                if val > b:
                    return None
        code.extend(chunk)
    if len(order) != n:
        return None
    return code


def canonical_hash(d: Dessin) -> str:
    import hashlib

    return hashlib.sha1(canonical_code(d)).hexdigest()[:16]


# ----------------------------------------------------------------------
# double cover


def double_cover(d: Dessin) -> Dessin:
    """Lift a dessin on a surface with boundary to its orientable double.

    Inner vertices and edges are duplicated (the copy carries the reversed
    rotation), real vertices lift once with the mirrored inner darts appended.
    """
    if not d.surface.orientable:
        raise InvalidDessin("double cover of a non-orientable quotient is not supported")
    b = MapBuilder(SurfaceSpec(True, 2 * d.surface.genus + d.surface.boundary_circles - 1, 0))
    up: dict[int, int] = {}
    down: dict[int, int] = {}
    lift_v: dict[int, tuple[int, int]] = {}
    for v in range(d.n_vertices):
        if d.vcircle[v] >= 0:
            w = b.add_vertex(d.vcolor[v])
            lift_v[v] = (w, w)
        else:
            lift_v[v] = (b.add_vertex(d.vcolor[v]), b.add_vertex(d.vcolor[v]))
    for v in range(d.n_vertices):
        w, w2 = lift_v[v]
        if d.vcircle[v] >= 0:
            ds = list(d.darts(v))
            for x in ds:
                up[x] = b.new_dart(w, d.ecolor[x])
            for x in reversed(ds[1:-1]):
                down[x] = b.new_dart(w, d.ecolor[x])
        else:
            for x in d.darts(v):
                up[x] = b.new_dart(w, d.ecolor[x])
            for x in reversed(list(d.darts(v))):
                down[x] = b.new_dart(w2, d.ecolor[x])
    for x, m in d.edges():
        b.link(up[x], up[m])
        if x in down:
            b.link(down[x], down[m])
    return b.build()
