"""Catalogs of cubic dessins and the classification of degree-6 uninodal toiles."""

from __future__ import annotations

import json
import os
from collections import defaultdict
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .core import (
    Dessin,
    MapBuilder,
    canonical_code,
    canonical_hash,
    degree,
    is_hyperbolic,
    singular_vertices,
    validate,
    zigzag_count,
)
from .errors import ClassCountMismatch, DessinError, FixtureCorrupt, Unclassified
from .fileio import parse
from .moves import ELEMENTARY_KINDS, KINDS, EquivalenceBudget, MoveSite, equivalent, replay, successors
from .structure import (
    arcs,
    close_ovals,
    glue_along_arc,
    invariant_vector,
    node_profile,
    quartic_interpretation,
)

CUBIC_NAMES = ("I0", "I1", "I2", "II0", "II1", "II2", "II3", "H")
TABLES = {1: "b0 = 1", 2: "b0 = 2, type II", 3: "b0 = 3", 4: "b0 = 2, type I", 5: "b0 = 4"}
TABLE_SIZES = {1: 3, 2: 4, 3: 4, 4: 4, 5: 5}


@dataclass
class ClassRecord:
    name: str
    representative: Dessin
    invariants: dict
    provenance: dict = field(default_factory=dict)
    members: list = field(default_factory=list)
    certificates: list = field(default_factory=list)
    table: tuple[int, int] | None = None
    label: str = ""
    quartic: dict | None = None

    @property
    def code(self) -> str:
        return canonical_hash(self.representative)

    def to_dict(self) -> dict:
        from .fileio import serialize

        out = {
            "name": self.name,
            "label": self.label,
            "canonical_hash": self.code,
            "invariants": _jsonable(self.invariants),
            "provenance": self.provenance,
            "members": len(self.members) or 1,
            "representative": serialize(self.representative),
        }
        if self.table is not None:
            out["table"] = {"id": self.table[0], "cell": self.table[1], "caption": TABLES[self.table[0]]}
        if self.quartic is not None:
            out["quartic"] = self.quartic
        if self.certificates:
            out["certificates"] = self.certificates
        return out


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (tuple, list)):
        return [_jsonable(v) for v in x]
    return x


# ----------------------------------------------------------------------
# fixtures


def fixture_dir() -> Path:
    env = os.environ.get("DESSIN_FIXTURES")
    if env:
        return Path(env)
    return Path(str(resources.files("realdessins") / "fixtures"))


def load_fixture(name: str) -> Dessin:
    path = fixture_dir() / f"{name}.dss"
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FixtureCorrupt(f"cannot read fixture {name}: {exc}") from None
    try:
        d = parse(text)
    except DessinError as exc:
        raise FixtureCorrupt(f"fixture {name} does not parse: {exc}") from None
    rep = validate(d)
    if rep:
        raise FixtureCorrupt(f"fixture {name} is not a dessin: {'; '.join(rep)}")
    return d


def fixture_names() -> list[str]:
    return sorted(p.stem for p in fixture_dir().glob("*.dss"))


def marked_crosses(name: str) -> dict[int, int]:
    """Marks ``# mark <n> v<id>`` declared in a fixture's comments."""
    out = {}
    for line in (fixture_dir() / f"{name}.dss").read_text(encoding="utf-8").splitlines():
        parts = line.split()
        if len(parts) == 4 and parts[:2] == ["#", "mark"]:
            out[int(parts[2])] = int(parts[3].lstrip("v"))
    return out


# ----------------------------------------------------------------------
# exploration helpers


def closure(d: Dessin, kinds=ELEMENTARY_KINDS, max_states: int = 200, slack: int = 4) -> list[Dessin]:
    """Breadth-first neighbourhood of ``d`` under the given moves, size-capped."""
    cap = d.n_vertices + slack
    seen = {canonical_code(d): d}
    frontier = [d]
    while frontier and len(seen) < max_states:
        nxt = []
        for cur in frontier:
            for _, res in successors(cur, kinds):
                if res.n_vertices > cap:
                    continue
                c = canonical_code(res)
                if c not in seen:
                    seen[c] = res
                    nxt.append(res)
                    if len(seen) >= max_states:
                        break
            if len(seen) >= max_states:
                break
        frontier = nxt
    return list(seen.values())


def _simple_real_cross(d: Dessin, v: int) -> bool:
    return d.vcolor[v] == "cross" and d.vcircle[v] >= 0 and d.degs[v] == 2


def node_degenerations(d: Dessin) -> list[Dessin]:
    """Uninodal dessins obtained by contracting a node-forming configuration.

    Two configurations are contracted: a real monochrome vertex of index 2
    flanked by two simple real crosses (the three merge into a node), and an
    inner simple cross hanging from a real monochrome vertex (the cross is
    pulled onto the boundary).
    """
    if singular_vertices(d):
        return []
    out = []
    for m in d.real_vertices():
        if d.vcolor[m] != "mono" or d.degs[m] != 3:
            continue
        col = d.ecolor[d.pred_dart(m)]
        other = "dotted" if col == "solid" else "solid" if col == "dotted" else None
        if other is None:
            continue
        inner = d.inner_darts(m)[0]
        x1, x2 = d.target(d.pred_dart(m)), d.target(d.succ_dart(m))
        if x1 != x2 and _simple_real_cross(d, x1) and _simple_real_cross(d, x2):
            b = MapBuilder.from_dessin(d)
            p, s, t = d.mate[d.pred_dart(x1)], d.mate[d.succ_dart(x2)], d.mate[inner]
            if {d.dvert[p], d.dvert[s]} & {x1, x2, m}:
                continue
            for v in (x1, m, x2):
                b.drop_vertex(v)
            n = b.add_vertex("cross", d.vcircle[m])
            a = b.new_dart(n, other)
            c = b.new_dart(n, col)
            e = b.new_dart(n, other)
            b.link(p, a)
            b.link(c, t)
            b.link(e, s)
            b.starts = {k: v for k, v in b.starts.items() if v not in (x1, m, x2)}
            _keep(out, b)
        x = d.target(inner)
        if d.vcolor[x] == "cross" and d.vcircle[x] < 0 and d.degs[x] == 2:
            far = [y for y in d.darts(x) if d.ecolor[y] == other]
            if not far:
                continue
            b = MapBuilder.from_dessin(d)
            p, s, t = d.mate[d.pred_dart(m)], d.mate[d.succ_dart(m)], d.mate[far[0]]
            b.drop_vertex(x)
            b.drop_vertex(m)
            n = b.add_vertex("cross", d.vcircle[m])
            a = b.new_dart(n, col)
            c = b.new_dart(n, other)
            e = b.new_dart(n, col)
            b.link(p, a)
            b.link(c, t)
            b.link(e, s)
            b.starts = {k: v for k, v in b.starts.items() if v != m}
            _keep(out, b)
    return out


def _keep(out: list, b: MapBuilder) -> None:
    try:
        r = b.build()
    except DessinError:
        return
    if not validate(r):
        out.append(r)


# ----------------------------------------------------------------------
# cubic catalogs


def cubic_catalog(certify: bool = True) -> list[ClassRecord]:
    """Elementary classes of nonsingular cubic dessins, from the fixture corpus.

    Each record's ``provenance['weak_class']`` names one of the three weak
    classes I, II and H.
    """
    recs = []
    for name in CUBIC_NAMES:
        d = load_fixture(f"cubic_{name}")
        if singular_vertices(d) or degree(d) != 3:
            raise FixtureCorrupt(f"fixture cubic_{name} is not a nonsingular cubic")
        inv = invariant_vector(d)
        weak = {"I": "I", "II": "II", "hyperbolic": "H"}[inv["type"]]
        recs.append(ClassRecord(name, d, inv, {"fixture": f"cubic_{name}", "weak_class": weak}))
    if certify:
        for i, a in enumerate(recs):
            for b in recs[i + 1:]:
                res = equivalent(a.representative, b.representative, allow_weak=False)
                if res.verdict != "no":
                    raise FixtureCorrupt(f"cubics {a.name} and {b.name} are not separated ({res.verdict})")
    return recs


def cubic_weak_classes(recs: list[ClassRecord] | None = None) -> dict[str, list[ClassRecord]]:
    """Group the cubic catalog into weak classes, with move lists joining the members."""
    recs = recs or cubic_catalog(certify=False)
    groups: dict[str, list[ClassRecord]] = defaultdict(list)
    for r in recs:
        groups[r.provenance["weak_class"]].append(r)
    for members in groups.values():
        head = members[0]
        for r in members[1:]:
            res = equivalent(head.representative, r.representative, allow_weak=True)
            if res.verdict != "yes":
                raise ClassCountMismatch(f"cubics {head.name} and {r.name} are not joined by moves")
            r.certificates.append({"from": head.name, "moves": [m.line() for m in res.moves]})
    return dict(groups)


def _cubic_pool(recs: list[ClassRecord], per_class: int) -> list[Dessin]:
    pool: dict[bytes, Dessin] = {}
    for r in recs:
        for d in closure(r.representative, ELEMENTARY_KINDS, per_class):
            pool.setdefault(canonical_code(d), d)
    return list(pool.values())


def uninodal_cubic_catalog(recs: list[ClassRecord] | None = None, per_class: int = 60,
                           pool: list[Dessin] | None = None) -> list[ClassRecord]:
    """Weak classes of uninodal cubic dessins reached by node-forming degenerations."""
    recs = recs or cubic_catalog(certify=False)
    pool = pool if pool is not None else _cubic_pool(recs, per_class)
    found: dict[bytes, tuple[Dessin, Dessin]] = {}
    for d in pool:
        for u in node_degenerations(d):
            found.setdefault(canonical_code(u), (u, d))
    members = [u for u, _ in found.values()]
    classes = _group(members, lambda d: _class_key(invariant_vector(d)))
    out = []
    for i, (key, group) in enumerate(sorted(classes.items(), key=lambda kv: repr(kv[0]))):
        rep = min(group, key=lambda d: (d.n_vertices, canonical_code(d)))
        prof = node_profile(rep)
        name = f"N{i + 1}"
        out.append(ClassRecord(name, rep, invariant_vector(rep),
                               {"degeneration_of": canonical_hash(found[canonical_code(rep)][1]),
                                "node_kind": prof.node_kind},
                               members=group))
    return out


# ----------------------------------------------------------------------
# degree 6 toiles


CLASS_FIELDS = ("ovals", "type", "segment", "node_label")


def class_key(d: Dessin) -> tuple:
    return _class_key(invariant_vector(d))


def _class_key(inv: dict) -> tuple:
    node = inv["node"]
    if node is None or node[0] not in ("isolated", "non_isolated"):
        seg, label = None, None
    else:
        kind, par, label = node
        seg = ("solid",) if kind == "isolated" else ("dotted",) + tuple(par)
    return (inv["ovals"], inv["type"], seg, label)


def _group(members, key) -> dict:
    out = defaultdict(list)
    for d in members:
        out[key(d)].append(d)
    return out


def enumerate_gluings(cubics: list[Dessin], uninodal: list[Dessin]) -> dict[bytes, tuple[Dessin, dict]]:
    """All axe gluings of two nonsingular cubics and all dotted-cut gluings of
    a nonsingular cubic with a uninodal one, deduplicated by canonical code."""
    out: dict[bytes, tuple[Dessin, dict]] = {}

    def add(a, x, b, y, kind):
        for bb in (b, b.mirror()):
            ys = [y] if bb is b else arcs(bb, "axe" if kind == "axe" else "cut", "dotted")
            for yy in ys:
                try:
                    g = glue_along_arc(a, x, bb, yy)
                except DessinError:
                    continue
                if len(singular_vertices(g)) != 1 and not is_hyperbolic(g):
                    continue
                c = canonical_code(g)
                if c not in out:
                    out[c] = (g, {"kind": kind, "left": canonical_hash(a), "left_arc": x,
                                  "right": canonical_hash(bb), "right_arc": yy,
                                  "right_mirrored": bb is not b})

    for a in cubics:
        for b in cubics:
            for x in arcs(a, "axe"):
                for y in arcs(b, "axe"):
                    add(a, x, b, y, "axe")
    for a in cubics:
        for b in uninodal:
            for x in arcs(a, "cut", "dotted"):
                for y in arcs(b, "cut", "dotted"):
                    add(a, x, b, y, "dotted_cut")
    return out


def table_of(inv: dict, quartic: dict) -> int:
    b0 = quartic["b0"]
    if b0 == 1:
        return 1
    if b0 == 3:
        return 3
    if b0 == 4:
        return 5
    return 4 if inv["type"] in ("I", "hyperbolic") else 2


def describe(inv: dict, quartic: dict) -> str:
    node = inv["node"]
    if inv["type"] == "hyperbolic":
        return "hyperbolic: two nested ovals, p on the inner oval"
    parts = [f"b0={quartic['b0']}", f"type {inv['type']}"]
    if node[0] == "isolated":
        parts.append("node on a solid segment")
    else:
        parts.append("node on a dotted segment (" + "/".join(node[1]) + ")")
    if node[2] is not None:
        parts.append("node label " + "".join(map(str, node[2])))
    if quartic.get("convex") is not None:
        parts.append("convex" if quartic["convex"] else "not convex")
    return ", ".join(parts)


def build_atlas(per_class: int = 40, certify: bool = True, budget: EquivalenceBudget | None = None,
                expected: int = 20, threads: int = 1) -> list[ClassRecord]:
    """Enumerate degree-6 uninodal toiles by gluing and group them into classes."""
    recs = cubic_catalog(certify=False)
    pool = _cubic_pool(recs, per_class)
    uninodal = uninodal_cubic_catalog(recs, pool=pool)
    nodal_pool = [u for r in uninodal for u in r.members]
    glued = enumerate_gluings([r.representative for r in recs], nodal_pool)
    groups: dict[tuple, list] = defaultdict(list)
    for g, prov in glued.values():
        groups[class_key(g)].append((g, prov))
    out = []
    for key, members in groups.items():
        members.sort(key=lambda gp: (gp[0].n_vertices, canonical_code(gp[0])))
        rep, prov = members[0]
        inv = invariant_vector(rep)
        rec = ClassRecord("", rep, inv, prov, members=[g for g, _ in members])
        q = quartic_interpretation(rep).to_dict()
        if q["b0"] == 4:
            best = max(close_ovals(g) for g in rec.members)
            q["close_ovals"] = best
        rec.quartic = q
        out.append(rec)
    _convexity(out)
    _name(out)
    if certify:
        certify_classes(out, budget, threads)
    if expected is not None and len(out) != expected:
        raise ClassCountMismatch(f"found {len(out)} classes of degree-6 uninodal toiles, expected {expected}")
    return out


def _convexity(recs: list[ClassRecord]) -> None:
    top = [r for r in recs if r.quartic["b0"] == 4]
    if not top:
        return
    most = max(r.quartic["close_ovals"] for r in top)
    for r in top:
        r.quartic["convex"] = r.quartic["close_ovals"] == most and most >= 2


def _sort_key(r: ClassRecord):
    node = r.invariants["node"]
    seg = 0 if node[0] == "isolated" else 1
    return (r.invariants["type"] == "hyperbolic", seg, node[1], node[2] or (), r.invariants["ovals"])


def _name(recs: list[ClassRecord]) -> None:
    by_table = defaultdict(list)
    for r in recs:
        by_table[table_of(r.invariants, r.quartic)].append(r)
    for t, rs in by_table.items():
        for i, r in enumerate(sorted(rs, key=_sort_key)):
            r.table = (t, i + 1)
            r.name = f"T{t}.{i + 1}"
            r.label = describe(r.invariants, r.quartic)
    recs.sort(key=lambda r: r.table)


def _potential(d: Dessin) -> tuple[int, int]:
    return (d.n_vertices, zigzag_count(d))


def descend(d: Dessin, kinds=KINDS) -> tuple[Dessin, list[MoveSite]]:
    """Greedy walk to a normal form.

    Every step strictly lowers ``(vertices, zigzags)``; among the candidates
    the one with the smallest potential and canonical code wins, so the normal
    form depends only on the isomorphism class of ``d``.
    """
    path: list[MoveSite] = []
    while True:
        here = _potential(d)
        best = None
        for m, r in successors(d, kinds):
            p = _potential(r)
            if p < here:
                key = (p, canonical_code(r))
                if best is None or key < best[0]:
                    best = (key, m, r)
        if best is None:
            return d, path
        path.append(best[1])
        d = best[2]


def _lines(moves) -> list[str]:
    return [m.line() for m in moves]


def certify_class(rec: ClassRecord, budget: EquivalenceBudget | None = None) -> dict:
    """Join every member of a class to its representative.

    Members are first pushed down to normal forms; a breadth-first search from
    the representative's normal form, capped slightly above the largest normal
    form, then has to reach all of them.  The certificate is replayable: the
    member's descent and the representative's descent followed by the path of
    the member's normal form end at isomorphic dessins.
    """
    budget = budget or EquivalenceBudget(max_states=20000)
    root, root_path = descend(rec.representative)
    nf_of: dict[bytes, int] = {}
    nf_list: list[Dessin] = []
    rows = []
    for g in rec.members:
        nf, path = descend(g)
        c = canonical_code(nf)
        if c not in nf_of:
            nf_of[c] = len(nf_list)
            nf_list.append(nf)
        rows.append({"member": canonical_hash(g), "nf": nf_of[c], "descent": _lines(path)})
    cap = max([d.n_vertices for d in nf_list] + [root.n_vertices]) + 2
    if budget.max_vertices is not None:
        cap = min(cap, budget.max_vertices)
    rc = canonical_code(root)
    parent: dict[bytes, tuple[bytes, MoveSite] | None] = {rc: None}
    want = set(nf_of) - {rc}
    frontier = [root]
    depth = 0
    while frontier and want and depth < budget.max_depth and len(parent) < budget.max_states:
        nxt = []
        for cur in frontier:
            cc = canonical_code(cur)
            for m, r in successors(cur):
                if r.n_vertices > cap:
                    continue
                c = canonical_code(r)
                if c in parent:
                    continue
                parent[c] = (cc, m)
                want.discard(c)
                nxt.append(r)
        frontier = nxt
        depth += 1
    if want:
        raise Unclassified(f"class {rec.name}: {len(want)} normal forms not reached within the budget")

    def path_to(c: bytes) -> list[str]:
        out = []
        while parent[c] is not None:
            c, m = parent[c]
            out.append(m.line())
        return out[::-1]

    return {"root_descent": _lines(root_path),
            "normal_forms": [{"nf": i, "path": path_to(c)} for c, i in sorted(nf_of.items(), key=lambda kv: kv[1])],
            "members": rows,
            "states": len(parent)}


def check_certificate(rep: Dessin, member: Dessin, cert: dict) -> bool:
    """Replay a class certificate for one member."""
    row = next((r for r in cert["members"] if r["member"] == canonical_hash(member)), None)
    if row is None:
        return False
    a = replay(member, map(MoveSite.parse_line, row["descent"]))
    b = replay(rep, map(MoveSite.parse_line, cert["root_descent"]))
    b = replay(b, map(MoveSite.parse_line, cert["normal_forms"][row["nf"]]["path"]))
    return canonical_code(a) == canonical_code(b)


def certify_classes(recs: list[ClassRecord], budget: EquivalenceBudget | None = None,
                    threads: int = 1) -> None:
    if threads > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(threads) as ex:
            certs = list(ex.map(certify_class, recs, [budget] * len(recs)))
    else:
        certs = [certify_class(r, budget) for r in recs]
    for r, c in zip(recs, certs):
        r.certificates = [c]


# ----------------------------------------------------------------------
# classification of a single toile


def load_atlas(path=None) -> list[ClassRecord]:
    path = Path(path) if path else fixture_dir() / "atlas.json"
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise FixtureCorrupt(f"cannot read atlas {path}: {exc}") from None
    out = []
    for row in data["classes"]:
        d = parse(row["representative"])
        inv = invariant_vector(d)
        rec = ClassRecord(row["name"], d, inv, row.get("provenance", {}),
                          table=(row["table"]["id"], row["table"]["cell"]), label=row["label"],
                          quartic=row.get("quartic"))
        out.append(rec)
    return out


def atlas_json(recs: list[ClassRecord]) -> dict:
    return {"format": "toile-atlas v1", "degree": 6, "classes": [r.to_dict() for r in recs]}


def classify_dessin(d: Dessin, atlas: list[ClassRecord] | None = None,
                    budget: EquivalenceBudget | None = None) -> ClassRecord:
    """The atlas class weakly equivalent to a degree-6 uninodal toile."""
    from .structure import _check_toile

    _check_toile(d) if not is_hyperbolic(d) else None
    atlas = atlas if atlas is not None else load_atlas()
    key = class_key(d)
    hits = [r for r in atlas if class_key(r.representative) == key]
    if len(hits) == 1:
        return hits[0]
    budget = budget or EquivalenceBudget(max_states=20000, max_depth=30)
    for r in hits or atlas:
        if equivalent(d, r.representative, allow_weak=True, budget=budget).verdict == "yes":
            return r
    raise Unclassified("no atlas class matched the invariants or the bounded search")
