"""Cuts, axes and gluing of real dessins, type I labelings and node invariants."""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import (
    DISK,
    Dessin,
    MapBuilder,
    boundary_profile,
    degree,
    is_hyperbolic,
    singular_vertices,
    validate,
)
from .errors import ArcMismatch, NotACutSite, NotAToile, NotUninodal, ResultInvalid

# ----------------------------------------------------------------------
# cut sites


@dataclass(frozen=True)
class CutSite:
    """An inner edge along which a dessin on the disk can be cut.

    ``dart`` is the dart of the edge at its first end (the node for an axe).
    """

    kind: str  # "dotted_cut" or "axe"
    dart: int
    ends: tuple[int, int]
    color: str

    def to_dict(self) -> dict:
        return {"kind": self.kind, "dart": self.dart, "ends": list(self.ends), "color": self.color}


def _is_node(d: Dessin, v: int) -> bool:
    return d.vcolor[v] == "cross" and d.vcircle[v] >= 0 and d.degs[v] == 3


def _is_real_mono(d: Dessin, v: int) -> bool:
    return d.vcolor[v] == "mono" and d.vcircle[v] >= 0 and d.degs[v] == 3


def find_cut_sites(d: Dessin, colors: tuple[str, ...] = ("dotted",)) -> list[CutSite]:
    """All axes and all cuts whose color is listed in ``colors``."""
    out = []
    for x, y in d.edges():
        if d.real_dart(x):
            continue
        u, v = d.dvert[x], d.dvert[y]
        if u == v:
            continue
        if _is_node(d, u) and _is_real_mono(d, v):
            out.append(CutSite("axe", x, (u, v), d.ecolor[x]))
        elif _is_node(d, v) and _is_real_mono(d, u):
            out.append(CutSite("axe", y, (v, u), d.ecolor[x]))
        elif _is_real_mono(d, u) and _is_real_mono(d, v) and d.ecolor[x] in colors:
            kind = "dotted_cut" if d.ecolor[x] == "dotted" else f"{d.ecolor[x]}_cut"
            out.append(CutSite(kind, x, (u, v), d.ecolor[x]))
    return out


def _components(b: MapBuilder) -> list[tuple[set[int], Dessin]]:
    """Split a builder into its connected components, each on the disk."""
    seen: set[int] = set()
    out = []
    for v0 in sorted(b.rot):
        if v0 in seen:
            continue
        comp = {v0}
        stack = [v0]
        while stack:
            v = stack.pop()
            for x in b.rot[v]:
                w = b.dvert[b.mate[x]]
                if w not in comp:
                    comp.add(w)
                    stack.append(w)
        seen |= comp
        part = MapBuilder(DISK)
        part.vcolor = {v: b.vcolor[v] for v in comp}
        part.vcircle = {v: 0 for v in comp if b.vcircle[v] >= 0}
        part.vcircle.update({v: -1 for v in comp if b.vcircle[v] < 0})
        part.rot = {v: list(b.rot[v]) for v in comp}
        darts = [x for v in comp for x in b.rot[v]]
        part.mate = {x: b.mate[x] for x in darts}
        part.ecolor = {x: b.ecolor[x] for x in darts}
        part.dvert = {x: b.dvert[x] for x in darts}
        starts = [v for v in comp if b.vcircle[v] >= 0]
        if starts:
            part.starts = {0: min(starts)}
        out.append((comp, part.build()))
    return out


def cut_along(d: Dessin, site: CutSite) -> tuple[Dessin, ...]:
    """Cut a dessin on the disk along a cut or an axe.

    Pieces come out in a fixed order: for an axe, the piece carrying the
    node's successor side first.
    """
    if site not in find_cut_sites(d, (site.color,)):
        raise NotACutSite(f"dart {site.dart} does not carry a {site.kind}")
    if d.surface != DISK:
        raise NotACutSite("cutting is implemented for dessins on the disk")
    u, v = site.ends
    b = MapBuilder.from_dessin(d)
    p_u, s_u = d.mate[d.pred_dart(u)], d.mate[d.succ_dart(u)]
    p_v, s_v = d.mate[d.pred_dart(v)], d.mate[d.succ_dart(v)]
    if len({p_u, s_u, p_v, s_v}) < 4 or {d.dvert[p_u], d.dvert[s_u], d.dvert[p_v], d.dvert[s_v]} & {u, v}:
        raise NotACutSite("the cut leaves a piece without essential boundary")
    b.drop_vertex(u)
    b.drop_vertex(v)
    if site.kind == "axe":
        mcol = site.color
        ncol = d.ecolor[d.pred_dart(u)]
        # piece through the node's successor: ... p_v -> x1 -> s_u ...
        x1 = b.add_vertex("cross", 0)
        a = b.new_dart(x1, mcol)
        c = b.new_dart(x1, ncol)
        b.link(p_v, a)
        b.link(c, s_u)
        x2 = b.add_vertex("cross", 0)
        a = b.new_dart(x2, ncol)
        c = b.new_dart(x2, mcol)
        b.link(p_u, a)
        b.link(c, s_v)
    else:
        b.link(p_u, s_v)
        b.link(p_v, s_u)
    parts = _components(b)
    if len(parts) != 2:
        raise NotACutSite("the edge does not separate the surface")
    for _, piece in parts:
        rep = validate(piece)
        if rep:
            raise ResultInvalid("a piece of the cut is not a dessin", rep)
    # the piece holding the successor side of the first end comes first
    if d.dvert[s_u] not in parts[0][0]:
        parts.reverse()
    return (parts[0][1], parts[1][1])


def arc_kind(d: Dessin, dart: int) -> str:
    """``"axe"`` for the predecessor dart of a simple real cross, ``"cut"`` for
    the successor dart of a real edge; anything else is not an arc."""
    if not 0 <= dart < d.n_darts or not d.real_dart(dart):
        raise ArcMismatch(f"dart {dart} is not a boundary dart")
    v = d.dvert[dart]
    if dart == d.pred_dart(v) and d.vcolor[v] == "cross" and d.degs[v] == 2:
        return "axe"
    if dart == d.succ_dart(v):
        return "cut"
    raise ArcMismatch(f"dart {dart} marks neither a simple real cross nor a real edge")


def arcs(d: Dessin, kind: str, color: str = "dotted") -> list[int]:
    """All arcs of a kind: simple real crosses (axe) or real edges of ``color`` (cut)."""
    out = []
    for v in d.real_vertices():
        if kind == "axe" and d.vcolor[v] == "cross" and d.degs[v] == 2:
            out.append(d.pred_dart(v))
        if kind == "cut" and d.ecolor[d.succ_dart(v)] == color:
            out.append(d.succ_dart(v))
    return out


def _arc_sign(d: Dessin, x: int) -> int:
    # sign of the region lying on the inner side of a real edge
    fo, holes = d.face_of, d.hole_faces
    f = fo[x] if fo[x] not in holes else fo[d.mate[x]]
    return d.face_signs[f]


def glue_along_arc(d1: Dessin, arc1: int, d2: Dessin, arc2: int) -> Dessin:
    """Glue two dessins on the disk along marked boundary arcs.

    Marking two simple real crosses produces a node joined by an axe to a
    new monochrome vertex; marking two real edges of one color produces two
    monochrome vertices joined by a cut.  Inverse of :func:`cut_along`.
    """
    if d1.surface != DISK or d2.surface != DISK:
        raise ArcMismatch("gluing is implemented for dessins on the disk")
    k1, k2 = arc_kind(d1, arc1), arc_kind(d2, arc2)
    if k1 != k2:
        raise ArcMismatch(f"cannot glue a {k1} arc to a {k2} arc")
    b = MapBuilder(DISK)
    off = _merge(b, d1, 0)
    _merge(b, d2, off)
    shift1 = lambda x: x  # noqa: E731
    shift2 = lambda x: x + d1.n_darts  # noqa: E731
    if k1 == "axe":
        x1, x2 = d1.dvert[arc1], d2.dvert[arc2]
        e1, f1 = d1.pred_dart(x1), d1.succ_dart(x1)
        e2, f2 = d2.pred_dart(x2), d2.succ_dart(x2)
        axe, ncol = d1.ecolor[e1], d1.ecolor[f1]
        if d2.ecolor[f2] != axe or d2.ecolor[e2] != ncol:
            raise ArcMismatch("the two crosses do not carry complementary real edges")
        p1, q1 = shift1(d1.mate[e1]), shift1(d1.mate[f1])
        p2, q2 = shift2(d2.mate[e2]), shift2(d2.mate[f2])
        b.drop_vertex(x1)
        b.drop_vertex(off + x2)
        node = b.add_vertex("cross", 0)
        n_p = b.new_dart(node, ncol)
        n_i = b.new_dart(node, axe)
        n_s = b.new_dart(node, ncol)
        mono = b.add_vertex("mono", 0)
        m_p = b.new_dart(mono, axe)
        m_i = b.new_dart(mono, axe)
        m_s = b.new_dart(mono, axe)
        b.link(p2, n_p)
        b.link(n_s, q1)
        b.link(p1, m_p)
        b.link(m_s, q2)
        b.link(n_i, m_i)
    else:
        c1, c2 = d1.ecolor[arc1], d2.ecolor[arc2]
        if c1 != c2:
            raise ArcMismatch(f"cannot glue a {c1} edge to a {c2} edge")
        if _arc_sign(d1, arc1) == _arc_sign(d2, arc2):
            raise ArcMismatch("the regions along the two arcs have the same sign")
        a_p, a_s = shift1(arc1), shift1(d1.mate[arc1])
        b_p, b_s = shift2(arc2), shift2(d2.mate[arc2])
        m1 = b.add_vertex("mono", 0)
        m1d = [b.new_dart(m1, c1) for _ in range(3)]
        m2 = b.add_vertex("mono", 0)
        m2d = [b.new_dart(m2, c1) for _ in range(3)]
        b.link(b_p, m1d[0])
        b.link(m1d[2], a_s)
        b.link(a_p, m2d[0])
        b.link(m2d[2], b_s)
        b.link(m1d[1], m2d[1])
    out = b.build()
    rep = validate(out)
    if rep:
        raise ResultInvalid("the gluing is not a dessin", rep)
    return out


def _merge(b: MapBuilder, d: Dessin, voff: int) -> int:
    doff = b._nd
    for v in range(d.n_vertices):
        b.vcolor[voff + v] = d.vcolor[v]
        b.vcircle[voff + v] = 0 if d.vcircle[v] >= 0 else -1
        b.rot[voff + v] = [doff + x for x in d.darts(v)]
        for x in d.darts(v):
            b.dvert[doff + x] = voff + v
            b.ecolor[doff + x] = d.ecolor[x]
            b.mate[doff + x] = doff + d.mate[x]
    b._nv = max(b._nv, voff + d.n_vertices)
    b._nd = doff + d.n_darts
    if voff == 0 and d.boundary and d.boundary[0]:
        b.starts[0] = d.boundary[0][0]
    return voff + d.n_vertices


# ----------------------------------------------------------------------
# type I labelings

_SWAP = {
    "solid": {1: 1, 2: 3, 3: 2},
    "bold": {3: 3, 1: 2, 2: 1},
    "dotted": {1: 1, 2: 2, 3: 3},
}
_REAL_FORBIDDEN = {"solid": 1, "bold": 3}


@dataclass
class TypeLabeling:
    labels: dict[int, int]  # face index -> label

    def of_dart(self, d: Dessin, x: int) -> int:
        return self.labels[d.face_of[x]]

    def to_dict(self) -> dict:
        return {str(k): v for k, v in sorted(self.labels.items())}


def check_labeling(d: Dessin, lab: TypeLabeling) -> list[str]:
    """Independent edge-by-edge check of a labeling; returns the violations."""
    bad = []
    for i in d.region_ids:
        if lab.labels.get(i) not in (1, 2, 3):
            bad.append(f"region {i} unlabeled")
    if bad:
        return bad
    for x, y in d.edges():
        c = d.ecolor[x]
        if d.real_dart(x):
            r = x if d.face_of[x] in lab.labels else y
            if _REAL_FORBIDDEN.get(c) == lab.labels[d.face_of[r]]:
                bad.append(f"real {c} edge at dart {x} carries the forbidden label")
            continue
        a, b = lab.labels[d.face_of[x]], lab.labels[d.face_of[y]]
        ok = {"solid": {a, b} in ({1}, {2, 3}),
              "bold": {a, b} in ({3}, {1, 2}),
              "dotted": a == b}[c]
        if not ok:
            bad.append(f"{c} edge at dart {x} joins labels {a} and {b}")
    return bad


def type_labelings(d: Dessin) -> list[TypeLabeling]:
    """Every labeling of the regions satisfying the edge rules."""
    regions = list(d.region_ids)
    if not regions:
        return []
    adj: dict[int, list[tuple[int, str]]] = {r: [] for r in regions}
    forbidden: dict[int, set[int]] = {r: set() for r in regions}
    for x, y in d.edges():
        c = d.ecolor[x]
        if d.real_dart(x):
            r = d.face_of[x] if d.face_of[x] in adj else d.face_of[y]
            if c in _REAL_FORBIDDEN:
                forbidden[r].add(_REAL_FORBIDDEN[c])
            continue
        fx, fy = d.face_of[x], d.face_of[y]
        adj[fx].append((fy, c))
        adj[fy].append((fx, c))
    out = []
    root = regions[0]
    for a in (1, 2, 3):
        lab = {root: a}
        stack = [root]
        ok = True
        while stack and ok:
            r = stack.pop()
            for s, c in adj[r]:
                want = _SWAP[c][lab[r]]
                if s in lab:
                    if lab[s] != want:
                        ok = False
                        break
                else:
                    lab[s] = want
                    stack.append(s)
        if not ok or len(lab) != len(regions):
            continue
        if any(lab[r] in forbidden[r] for r in regions):
            continue
        out.append(TypeLabeling(lab))
    return out


def type_labeling(d: Dessin) -> TypeLabeling | None:
    if is_hyperbolic(d):
        return None
    labs = type_labelings(d)
    return labs[0] if labs else None


def dessin_type(d: Dessin) -> str:
    if is_hyperbolic(d):
        return "hyperbolic"
    return "I" if type_labelings(d) else "II"


# ----------------------------------------------------------------------
# node profile


@dataclass(frozen=True)
class NodeProfile:
    node: int
    node_kind: str  # "isolated" or "non_isolated"
    segment_color: str
    white_parities: tuple[str, ...]
    node_label: tuple[int, ...] | None = None

    def key(self) -> tuple:
        return (self.node_kind, self.white_parities, self.node_label)

    def to_dict(self) -> dict:
        return {"node": self.node, "node_kind": self.node_kind, "segment_color": self.segment_color,
                "white_parities": list(self.white_parities),
                "node_label": list(self.node_label) if self.node_label is not None else None}


def the_node(d: Dessin) -> int:
    sing = singular_vertices(d)
    if len(sing) != 1:
        raise NotUninodal(f"expected exactly one singular vertex, found {len(sing)}")
    v = sing[0]
    if d.vcolor[v] != "cross" or d.index(v) != 2 or d.vcircle[v] < 0:
        raise NotUninodal("the singular vertex is not a real node")
    return v


def _parity(k: int) -> str:
    return "even" if k % 2 == 0 else "odd"


def node_profile(d: Dessin) -> NodeProfile:
    v = the_node(d)
    col = d.ecolor[d.pred_dart(v)]
    kind = "isolated" if col == "solid" else "non_isolated"
    parities: tuple[str, ...] = ()
    if col == "dotted":
        counts = []
        for step in (d.succ_dart, d.pred_dart):
            k, u = 0, v
            while d.ecolor[step(u)] == "dotted":
                u = d.target(step(u))
                if u == v:
                    break
                k += d.vcolor[u] == "white"
            counts.append(k)
        parities = tuple(sorted(_parity(k) for k in counts))
    label = None
    labs = type_labelings(d) if not is_hyperbolic(d) else []
    if labs:
        found = set()
        for lab in labs:
            found.add(tuple(sorted({lab.labels[d.face_of[x]] for x in d.darts(v)
                                    if d.face_of[x] in lab.labels})))
        label = min(found)
    return NodeProfile(v, kind, col, parities, label)


# ----------------------------------------------------------------------
# pointed quartic interpretation


@dataclass(frozen=True)
class QuarticClass:
    b0: int
    p_oval_parity: str
    tangent_meets: int
    components: int
    adjacency: str
    convex: bool | None = None
    close_ovals: int | None = None

    def to_dict(self) -> dict:
        return {"b0": self.b0, "p_oval_parity": self.p_oval_parity,
                "tangent_meets": self.tangent_meets, "components": self.components,
                "adjacency": self.adjacency, "convex": self.convex, "close_ovals": self.close_ovals}


def _check_toile(d: Dessin) -> None:
    try:
        if degree(d) != 6:
            raise NotAToile("a degree-6 toile is required")
    except NotAToile:
        raise
    except Exception as exc:
        raise NotAToile(str(exc)) from None
    if d.surface != DISK:
        raise NotAToile("toiles live on the disk")
    try:
        the_node(d)
    except NotUninodal as exc:
        raise NotAToile(str(exc)) from None


def close_ovals(d: Dessin) -> int:
    """Ovals that may be pushed arbitrarily close to the component of the node."""
    prof = boundary_profile(d)
    count = 0
    zig_x = set()
    for s in prof.segments:
        if s.kind == "zigzag":
            zig_x |= {s.vertices[0], s.vertices[-1]}
    for s in prof.segments:
        if s.kind != "oval":
            continue
        ends = [s.vertices[0], s.vertices[-1]]
        close = False
        # a shared solid monochrome neighbour with a zigzag end
        for e in ends:
            if d.vcolor[e] != "cross" or d.index(e) != 1:
                continue
            for x in d.darts(e):
                m = d.target(x)
                if d.vcolor[m] == "mono" and d.ecolor[x] == "solid":
                    for y in d.darts(m):
                        z = d.target(y)
                        if z in zig_x:
                            close = True
        # an inner simple cross hanging from a dotted monochrome vertex of the oval
        interior = s.vertices[1:-1]
        for i, m in enumerate(interior):
            if d.vcolor[m] != "mono" or d.vcircle[m] < 0:
                continue
            inner_x = [d.target(x) for x in d.inner_darts(m)]
            if any(d.vcolor[t] == "cross" and d.vcircle[t] < 0 and d.index(t) == 1 for t in inner_x):
                left = sum(1 for u in interior[:i] if d.vcolor[u] == "white")
                right = sum(1 for u in interior[i + 1:] if d.vcolor[u] == "white")
                if left % 2 or right % 2:
                    close = True
        count += close
    return count


def quartic_interpretation(d: Dessin) -> QuarticClass:
    _check_toile(d)
    prof = boundary_profile(d)
    if is_hyperbolic(d) or prof.hyperbolic:
        return QuarticClass(2, "odd", 1, 3, "two nested ovals; p on the inner oval", None, None)
    node = node_profile(d)
    if node.node_kind == "isolated":
        b0 = prof.ovals + 1
        meets, comps = 0, b0
        adj = "tangent meets the curve again at two complex points"
    elif node.white_parities == ("even", "even"):
        b0 = prof.ovals + 2
        meets, comps = 1, b0 + 1
        adj = "tangent meets one further oval in two real points"
    else:
        b0 = prof.ovals + 1
        meets, comps = 0, b0 + 2
        odd = node.white_parities.count("odd")
        adj = f"tangent cuts the oval of p again; {odd} adjacent arc(s) with four real intersections"
    convex = None
    close = None
    if b0 == 4:
        close = close_ovals(d)
    return QuarticClass(b0, "even", meets, comps, adj, convex, close)


# ----------------------------------------------------------------------
# invariant vector


def invariant_vector(d: Dessin) -> dict:
    """Invariants used to separate classes; all entries are hashable."""
    prof = boundary_profile(d)
    try:
        deg = degree(d)
    except Exception:
        deg = None
    sing = singular_vertices(d)
    node = None
    if len(sing) == 1:
        try:
            node = node_profile(d).key()
        except NotUninodal:
            node = ("singular",)
    elif sing:
        node = ("multi", len(sing))
    return {
        "degree": deg,
        "ovals": prof.ovals,
        "zigzags": prof.zigzags,
        "hyperbolic": prof.hyperbolic,
        "type": dessin_type(d),
        "node": node,
    }


@dataclass
class Decomposition:
    site: CutSite
    pieces: tuple[Dessin, ...]
    dessin: Dessin
    moves: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"site": self.site.to_dict(), "moves": [m.line() for m in self.moves],
                "piece_degrees": [degree(p) for p in self.pieces]}


def _try_cut(d: Dessin):
    for site in find_cut_sites(d):
        try:
            pieces = cut_along(d, site)
        except (NotACutSite, ResultInvalid):
            continue
        try:
            if all(degree(p) < degree(d) for p in pieces):
                return site, pieces
        except Exception:
            continue
    return None


def decompose_uninodal(d: Dessin, budget=None) -> Decomposition | None:
    """Find a weakly equivalent dessin with a dotted cut or an axe and cut it.

    Returns ``None`` when the search budget is exhausted.
    """
    from .core import canonical_code
    from .errors import PreconditionFailed
    from .moves import EquivalenceBudget, successors

    if degree(d) <= 3:
        raise PreconditionFailed("decomposition needs degree higher than 3")
    the_node(d) if not is_hyperbolic(d) else None
    budget = budget or EquivalenceBudget()
    hit = _try_cut(d)
    if hit:
        return Decomposition(hit[0], hit[1], d, [])
    cap = budget.max_vertices or 3 * d.n_vertices
    seen = {canonical_code(d)}
    frontier = [(d, [])]
    for _ in range(budget.max_depth):
        nxt = []
        for cur, path in frontier:
            for site, res in successors(cur):
                if res.n_vertices > cap:
                    continue
                code = canonical_code(res)
                if code in seen:
                    continue
                seen.add(code)
                hit = _try_cut(res)
                if hit:
                    return Decomposition(hit[0], hit[1], res, path + [site])
                if len(seen) >= budget.max_states:
                    return None
                nxt.append((res, path + [site]))
        frontier = nxt
        if not frontier:
            break
    return None


def reglue(dec: Decomposition) -> Dessin:
    """Glue the pieces of a decomposition back along arcs of the cut's kind.

    Returns the gluing isomorphic to the cut dessin; raises ArcMismatch when
    no pair of arcs reproduces it.
    """
    from .core import canonical_code

    kind = "axe" if dec.site.kind == "axe" else "cut"
    target = canonical_code(dec.dessin)
    p1, p2 = dec.pieces
    for a in arcs(p1, kind, dec.site.color):
        for b in arcs(p2, kind, dec.site.color):
            for x, y in ((p1, a), (p2, b)), ((p2, b), (p1, a)):
                try:
                    g = glue_along_arc(x[0], x[1], y[0], y[1])
                except (ArcMismatch, ResultInvalid):
                    continue
                if canonical_code(g) == target:
                    return g
    raise ArcMismatch("no pair of arcs glues the pieces back into the cut dessin")
