"""Reading and writing the ``dessin v1`` text format and its JSON dump.

A file looks like::

    dessin v1 surface=orientable:0:1
    boundary 0: v0(black) -bold- v1(white) -bold- ... -solid- (close)
    inner v7(cross)
    edge solid v0@1 v7@0
    orient region-at v0@1 = +

Slots index a vertex's rotation.  For a real vertex slot 0 is the dart
towards its boundary predecessor, the inner darts follow counter-clockwise
and the last slot points to the boundary successor.  ``inner`` lines declare
the colors of inner vertices; lines starting with ``#`` are comments.
"""

from __future__ import annotations

import json
import re

from .core import EDGE_COLORS, VERTEX_COLORS, Dessin, SurfaceSpec
from .errors import DessinSyntaxError

_HEADER = re.compile(r"dessin v1 surface=(orientable|nonorientable):(\d+):(\d+)$")
_BOUNDARY = re.compile(r"boundary (\d+):\s*(.*)$")
_VTOK = re.compile(r"v(\d+)\((\w+)\)")
_ETOK = re.compile(r"-(\w+)-")
_INNER = re.compile(r"inner v(\d+)\((\w+)\)$")
_EDGE = re.compile(r"edge (\w+) v(\d+)@(\d+) v(\d+)@(\d+)$")
_ORIENT = re.compile(r"orient region-at v(\d+)@(\d+) = \+$")


def parse(text: str) -> Dessin:
    """Parse a dessin file (or its JSON dump) into a :class:`Dessin`."""
    if text.lstrip().startswith("{"):
        try:
            return from_json(json.loads(text))
        except (ValueError, KeyError, TypeError) as exc:
            raise DessinSyntaxError(f"malformed JSON dessin: {exc}") from None
    lines = [(i + 1, ln.split("#", 1)[0].strip()) for i, ln in enumerate(text.splitlines())]
    lines = [(i, ln) for i, ln in lines if ln]
    if not lines:
        raise DessinSyntaxError("empty input", 1)
    lno, head = lines[0]
    m = _HEADER.match(head)
    if not m:
        raise DessinSyntaxError("expected header 'dessin v1 surface=<kind>:<genus>:<circles>'", lno, 1)
    surface = SurfaceSpec(m.group(1) == "orientable", int(m.group(2)), int(m.group(3)))

    colors: dict[int, str] = {}
    circle_of: dict[int, int] = {}
    circles: dict[int, list[tuple[int, str]]] = {}
    inner_edges: list[tuple[int, str, tuple[int, int], tuple[int, int]]] = []
    orient: tuple[int, int] | None = None

    def declare(v: int, c: str, ln: int, col: int) -> None:
        if c not in VERTEX_COLORS:
            raise DessinSyntaxError(f"unknown vertex color {c!r}", ln, col)
        if v in colors:
            raise DessinSyntaxError(f"vertex v{v} declared twice", ln, col)
        colors[v] = c

    for lno, ln in lines[1:]:
        if ln.startswith("boundary"):
            m = _BOUNDARY.match(ln)
            if not m:
                raise DessinSyntaxError("malformed boundary line", lno, 1)
            ci = int(m.group(1))
            if ci in circles:
                raise DessinSyntaxError(f"boundary circle {ci} listed twice", lno, 1)
            body, base = m.group(2), m.start(2)
            seq: list[tuple[int, str]] = []
            pos = 0
            pending: int | None = None
            while True:
                while pos < len(body) and body[pos] == " ":
                    pos += 1
                if body.startswith("(close)", pos):
                    if pending is not None or not seq:
                        raise DessinSyntaxError("boundary must end with an edge before (close)", lno, base + pos + 1)
                    pos += len("(close)")
                    break
                vm = _VTOK.match(body, pos)
                if vm and pending is None:
                    v = int(vm.group(1))
                    declare(v, vm.group(2), lno, base + pos + 1)
                    circle_of[v] = ci
                    seq.append((v, ""))
                    pending = v
                    pos = vm.end()
                    continue
                em = _ETOK.match(body, pos)
                if em and pending is not None:
                    body_color = em.group(1)
                    if body_color not in EDGE_COLORS:
                        raise DessinSyntaxError(f"unknown edge color {body_color!r}", lno, base + pos + 1)
                    seq[-1] = (seq[-1][0], body_color)
                    pending = None
                    pos = em.end()
                    continue
                raise DessinSyntaxError("unexpected token in boundary line", lno, base + pos + 1)
            if body[pos:].strip():
                raise DessinSyntaxError("trailing text after (close)", lno, base + pos + 1)
            circles[ci] = seq
        elif ln.startswith("inner"):
            m = _INNER.match(ln)
            if not m:
                raise DessinSyntaxError("malformed inner vertex line", lno, 1)
            declare(int(m.group(1)), m.group(2), lno, 7)
        elif ln.startswith("edge"):
            m = _EDGE.match(ln)
            if not m:
                raise DessinSyntaxError("malformed edge line", lno, 1)
            if m.group(1) not in EDGE_COLORS:
                raise DessinSyntaxError(f"unknown edge color {m.group(1)!r}", lno, 6)
            inner_edges.append((lno, m.group(1), (int(m.group(2)), int(m.group(3))),
                                (int(m.group(4)), int(m.group(5)))))
        elif ln.startswith("orient"):
            m = _ORIENT.match(ln)
            if not m:
                raise DessinSyntaxError("malformed orient line", lno, 1)
            orient = (int(m.group(1)), int(m.group(2)))
        else:
            raise DessinSyntaxError("unrecognised line", lno, 1)

    for c in range(surface.boundary_circles):
        if c not in circles:
            raise DessinSyntaxError(f"boundary circle uncovered: circle {c}")
    if set(circles) - set(range(surface.boundary_circles)):
        raise DessinSyntaxError("boundary circle index exceeds the surface's circle count")

    # slot bookkeeping
    slots: dict[int, dict[int, tuple[str, tuple[int, int]]]] = {v: {} for v in colors}
    for lno, col, a, b in inner_edges:
        for end, other in ((a, b), (b, a)):
            v, s = end
            if v not in colors:
                raise DessinSyntaxError(f"dangling dart reference v{v}@{s}", lno)
            if s in slots[v]:
                raise DessinSyntaxError(f"slot v{v}@{s} used twice", lno)
            slots[v][s] = (col, other)
        if a == b:
            raise DessinSyntaxError("an edge cannot join a dart to itself", lno)

    ids = sorted(colors)
    vid = {v: i for i, v in enumerate(ids)}
    degs = []
    for v in ids:
        k = len(slots[v])
        if v in circle_of:
            want = set(range(1, k + 1))
            degs.append(k + 2)
        else:
            want = set(range(k))
            degs.append(k)
        if set(slots[v]) != want:
            raise DessinSyntaxError(f"rotation order inconsistent with boundary order at v{v}")
    offsets = [0]
    for k in degs[:-1]:
        offsets.append(offsets[-1] + k)
    n = sum(degs)
    mate = [-1] * n
    ecolor = [""] * n

    def dart(v: int, s: int) -> int:
        return offsets[vid[v]] + s

    for ci, seq in sorted(circles.items()):
        for i, (v, col) in enumerate(seq):
            w = seq[(i + 1) % len(seq)][0]
            a = dart(v, degs[vid[v]] - 1)
            b = dart(w, 0)
            mate[a], mate[b] = b, a
            ecolor[a] = ecolor[b] = col
    for lno, col, (u, s), (w, t) in inner_edges:
        a, b = dart(u, s), dart(w, t)
        mate[a], mate[b] = b, a
        ecolor[a] = ecolor[b] = col
    if -1 in mate:
        raise DessinSyntaxError("dangling dart reference")
    vcircle = tuple(circle_of.get(v, -1) for v in ids)
    boundary = tuple(tuple(vid[v] for v, _ in circles[c]) for c in range(surface.boundary_circles))
    pin = None
    if orient is not None:
        v, s = orient
        if v not in vid or not 0 <= s < degs[vid[v]]:
            raise DessinSyntaxError(f"dangling dart reference v{v}@{s} in orient line")
        pin = dart(v, s)
    return Dessin(surface, tuple(colors[v] for v in ids), vcircle, tuple(degs), tuple(mate),
                  tuple(ecolor), boundary, pin)


def serialize(d: Dessin) -> str:
    out = [f"dessin v1 surface={d.surface.token()}"]
    for c, seq in enumerate(d.boundary):
        parts = []
        for v in seq:
            parts.append(f"v{v}({d.vcolor[v]})")
            parts.append(f"-{d.ecolor[d.succ_dart(v)]}-")
        out.append(f"boundary {c}: " + " ".join(parts) + " (close)")
    for v in d.inner_vertices():
        out.append(f"inner v{v}({d.vcolor[v]})")
    for a, b in d.edges():
        if d.real_dart(a):
            continue
        out.append(f"edge {d.ecolor[a]} v{d.dvert[a]}@{d.pos(a)} v{d.dvert[b]}@{d.pos(b)}")
    if d.pin is not None:
        out.append(f"orient region-at v{d.dvert[d.pin]}@{d.pos(d.pin)} = +")
    return "\n".join(out) + "\n"


def to_json(d: Dessin) -> dict:
    """Full structural dump; :func:`from_json` inverts it."""
    return {
        "format": "dessin-json v1",
        "surface": {"orientable": d.surface.orientable, "genus": d.surface.genus,
                    "boundary_circles": d.surface.boundary_circles},
        "vertices": [
            {"id": v, "color": d.vcolor[v], "circle": d.vcircle[v], "index": d.index(v),
             "darts": list(d.darts(v))}
            for v in range(d.n_vertices)
        ],
        "darts": [
            {"id": x, "vertex": d.dvert[x], "color": d.ecolor[x], "mate": d.mate[x],
             "real": d.real_dart(x), "direction": d.direction(x)}
            for x in range(d.n_darts)
        ],
        "boundary": [list(seq) for seq in d.boundary],
        "regions": [
            {"walk": list(d.faces[i]), "sign": d.face_signs[i]} for i in d.region_ids
        ],
        "pin": d.pin,
    }


def from_json(obj: dict) -> Dessin:
    s = obj["surface"]
    surface = SurfaceSpec(bool(s["orientable"]), int(s["genus"]), int(s["boundary_circles"]))
    verts = sorted(obj["vertices"], key=lambda r: r["id"])
    darts = sorted(obj["darts"], key=lambda r: r["id"])
    return Dessin(
        surface,
        tuple(r["color"] for r in verts),
        tuple(int(r["circle"]) for r in verts),
        tuple(len(r["darts"]) for r in verts),
        tuple(int(r["mate"]) for r in darts),
        tuple(r["color"] for r in darts),
        tuple(tuple(seq) for seq in obj["boundary"]),
        obj.get("pin"),
    )


def load(path) -> Dessin:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def dump(d: Dessin, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(d))
