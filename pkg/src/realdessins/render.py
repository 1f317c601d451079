"""Drawing dessins: DOT text, SVG with a barycentric layout, JSON and PNG."""

from __future__ import annotations

import json
import math
import textwrap
from collections import Counter

import numpy as np

from .core import Dessin, DISK
from .errors import UnknownFormat
from .fileio import to_json

FORMATS = ("dot", "svg", "json", "png")

_DOT_STYLE = {"solid": 'style=solid', "bold": 'style=bold, penwidth=3', "dotted": 'style=dashed'}
_DOT_SHAPE = {
    "black": 'shape=circle, style=filled, fillcolor=black, label="", width=0.15',
    "white": 'shape=circle, label="", width=0.15',
    "cross": 'shape=plaintext, label="×"',
    "mono": 'shape=point, width=0.05',
}


def to_dot(d: Dessin, name: str = "dessin") -> str:
    lines = [f'graph "{name}" {{', "  node [fontsize=10];"]
    for c, seq in enumerate(d.boundary):
        lines.append(f"  subgraph cluster_boundary_{c} {{")
        lines.append(f'    label="boundary {c}";')
        for v in seq:
            lines.append(f"    v{v} [{_vertex_attr(d, v)}];")
        for v in seq:
            x = d.succ_dart(v)
            lines.append(f"    v{v} -- v{d.target(x)} [{_DOT_STYLE[d.ecolor[x]]}];")
        lines.append("  }")
    for v in d.inner_vertices():
        lines.append(f"  v{v} [{_vertex_attr(d, v)}];")
    for a, b in d.edges():
        if d.real_dart(a):
            continue
        lines.append(f"  v{d.dvert[a]} -- v{d.dvert[b]} [{_DOT_STYLE[d.ecolor[a]]}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _vertex_attr(d: Dessin, v: int) -> str:
    if d.vcolor[v] == "cross" and d.index(v) == 2:
        return 'shape=plaintext, label="⨯⨯"'
    return _DOT_SHAPE[d.vcolor[v]]


# ----------------------------------------------------------------------
# layout


def layout(d: Dessin) -> dict[int, tuple[float, float]]:
    """Real vertices equally spaced on the unit circle, inner vertices at the
    barycentre of their neighbours (Tutte's spring embedding)."""
    pos: dict[int, tuple[float, float]] = {}
    fixed = []
    circles = [seq for seq in d.boundary if seq]
    for c, seq in enumerate(circles):
        r = 1.0 if c == 0 else 0.35
        cx = 0.0 if c == 0 else 0.45 * math.cos(2 * math.pi * c / len(circles))
        cy = 0.0 if c == 0 else 0.45 * math.sin(2 * math.pi * c / len(circles))
        n = len(seq)
        for i, v in enumerate(seq):
            # clockwise, so that the interior lies to the right of the boundary walk
            t = math.pi / 2 - 2 * math.pi * i / n
            pos[v] = (cx + r * math.cos(t), cy + r * math.sin(t))
            fixed.append(v)
    inner = d.inner_vertices()
    if inner:
        idx = {v: i for i, v in enumerate(inner)}
        a = np.zeros((len(inner), len(inner)))
        rhs = np.zeros((len(inner), 2))
        for v in inner:
            i = idx[v]
            for x in d.darts(v):
                w = d.target(x)
                a[i, i] += 1
                if w in idx:
                    a[i, idx[w]] -= 1
                else:
                    rhs[i] += pos.get(w, (0.0, 0.0))
        # isolated inner components (no path to the boundary) sit near the centre
        a += 1e-9 * np.eye(len(inner))
        sol = np.linalg.solve(a, rhs)
        for v in inner:
            pos[v] = (float(sol[idx[v], 0]), float(sol[idx[v], 1]))
    return pos


def _edge_paths(d: Dessin, pos) -> list[tuple[str, list[tuple[float, float]], bool]]:
    """Polylines for every edge; multiple edges between two vertices bend apart."""
    out = []
    seen: Counter = Counter()
    for a, b in d.edges():
        u, v = d.dvert[a], d.dvert[b]
        col = d.ecolor[a]
        if d.real_dart(a):
            out.append((col, _arc(pos[u], pos[v]), True))
            continue
        key = (min(u, v), max(u, v))
        k = seen[key]
        seen[key] += 1
        bend = 0.0 if k == 0 else 0.12 * ((k + 1) // 2) * (1 if k % 2 else -1)
        out.append((col, _curve(pos[u], pos[v], bend), False))
    return out


def _arc(p, q, steps: int = 12):
    a0, a1 = math.atan2(p[1], p[0]), math.atan2(q[1], q[0])
    r0, r1 = math.hypot(*p), math.hypot(*q)
    if abs(r0 - 1) > 1e-9 or abs(r1 - 1) > 1e-9:
        return [p, q]
    da = (a1 - a0) % (2 * math.pi)
    if da > math.pi:
        da -= 2 * math.pi
    if abs(da) < 1e-12:
        da = -2 * math.pi  # a loop around the whole circle
    return [(math.cos(a0 + da * t / steps), math.sin(a0 + da * t / steps)) for t in range(steps + 1)]


def _curve(p, q, bend: float, steps: int = 10):
    if p == q:
        cx, cy = p
        return [(cx + 0.08 * math.cos(2 * math.pi * t / steps) - 0.08, cy + 0.08 * math.sin(2 * math.pi * t / steps))
                for t in range(steps + 1)]
    mx, my = (p[0] + q[0]) / 2, (p[1] + q[1]) / 2
    dx, dy = q[0] - p[0], q[1] - p[1]
    cx, cy = mx - bend * dy, my + bend * dx
    pts = []
    for i in range(steps + 1):
        t = i / steps
        pts.append(((1 - t) ** 2 * p[0] + 2 * t * (1 - t) * cx + t * t * q[0],
                    (1 - t) ** 2 * p[1] + 2 * t * (1 - t) * cy + t * t * q[1]))
    return pts


# ----------------------------------------------------------------------
# SVG


def to_svg(d: Dessin, size: int = 360, title: str | None = None) -> str:
    pos = layout(d)
    s = size / 2.4

    def xy(p):
        return (size / 2 + s * p[0], size / 2 - s * p[1])

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">']
    if title:
        parts.append(f"<title>{_esc(title)}</title>")
    parts.append('<rect width="100%" height="100%" fill="white"/>')
    if d.surface == DISK:
        parts.append(f'<circle cx="{size / 2}" cy="{size / 2}" r="{s}" fill="none" stroke="#ccc" stroke-width="6"/>')
    style = {"solid": 'stroke="black" stroke-width="1.2"',
             "bold": 'stroke="black" stroke-width="3.2"',
             "dotted": 'stroke="black" stroke-width="1.2" stroke-dasharray="3,3"'}
    for col, pts, _ in _edge_paths(d, pos):
        path = " ".join(f"{x:.2f},{y:.2f}" for x, y in map(xy, pts))
        parts.append(f'<polyline points="{path}" fill="none" {style[col]}/>')
    for v in range(d.n_vertices):
        x, y = xy(pos[v])
        c = d.vcolor[v]
        if c == "black":
            parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="4.5" fill="black"/>')
        elif c == "white":
            parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="4.5" fill="white" stroke="black"/>')
        elif c == "mono":
            parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="1.8" fill="black"/>')
        else:
            parts.append(_cross(x, y, 5))
            if d.index(v) == 2:
                parts.append(_cross(x, y, 8, 'class="node"'))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _cross(x: float, y: float, r: float, extra: str = "") -> str:
    return (f'<path {extra} d="M{x - r:.2f},{y - r:.2f} L{x + r:.2f},{y + r:.2f} '
            f'M{x - r:.2f},{y + r:.2f} L{x + r:.2f},{y - r:.2f}" stroke="black" stroke-width="1.6"/>')


def _esc(t: str) -> str:
    return t.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


# ----------------------------------------------------------------------
# matplotlib


def draw(d: Dessin, ax, title: str | None = None) -> None:
    """Draw a dessin on a matplotlib axis."""
    pos = layout(d)
    if d.surface == DISK:
        t = np.linspace(0, 2 * np.pi, 200)
        ax.plot(np.cos(t), np.sin(t), color="#d0d0d0", lw=5, zorder=0)
    widths = {"solid": 1.0, "bold": 2.8, "dotted": 1.0}
    for col, pts, _ in _edge_paths(d, pos):
        xs, ys = zip(*pts)
        ax.plot(xs, ys, color="black", lw=widths[col], ls=":" if col == "dotted" else "-", zorder=1)
    for v in range(d.n_vertices):
        x, y = pos[v]
        c = d.vcolor[v]
        if c == "black":
            ax.plot(x, y, "o", ms=6, color="black", zorder=2)
        elif c == "white":
            ax.plot(x, y, "o", ms=6, mfc="white", mec="black", zorder=2)
        elif c == "mono":
            ax.plot(x, y, ".", ms=3, color="black", zorder=2)
        else:
            ax.plot(x, y, "x", ms=11 if d.index(v) == 2 else 6, mew=2 if d.index(v) == 2 else 1.4,
                    color="black", zorder=2)
    ax.set_aspect("equal")
    ax.axis("off")
    if title:
        ax.set_title(textwrap.fill(title, 34), fontsize=7)


def save_png(d: Dessin, path, title: str | None = None) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(3.2, 3.2))
    draw(d, ax, title)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)


def save_gallery(items: list[tuple[str, Dessin]], path, cols: int = 5) -> None:
    """One figure with a panel per (title, dessin)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = max(1, math.ceil(len(items) / cols))
    fig, axes = plt.subplots(rows, cols, figsize=(2.8 * cols, 3.2 * rows))
    axes = np.atleast_1d(axes).ravel()
    for ax in axes:
        ax.axis("off")
    for ax, (title, d) in zip(axes, items):
        draw(d, ax, title)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render(d: Dessin, fmt: str, title: str | None = None) -> str | bytes:
    if fmt == "dot":
        return to_dot(d)
    if fmt == "svg":
        return to_svg(d, title=title)
    if fmt == "json":
        return json.dumps(to_json(d), indent=1) + "\n"
    if fmt == "png":
        import io
        import tempfile

        with tempfile.NamedTemporaryFile(suffix=".png") as fh:
            save_png(d, fh.name, title)
            return io.open(fh.name, "rb").read()
    raise UnknownFormat(f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")
