"""Command line: ``dessin <verb> [options]``."""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import classify as cl
from .core import (
    boundary_profile,
    canonical_code,
    canonical_hash,
    color_sums,
    degree,
    singular_vertices,
    validate,
)
from .errors import ClassCountMismatch, DessinError, InvalidDessin, NonGenericInput
from .fileio import parse, serialize
from .jinv import (
    QUARTIC_MONOMIALS,
    TraceOptions,
    WeierstrassPair,
    from_quartic,
    parse_polynomials,
    trace,
)
from .moves import KINDS, EquivalenceBudget, equivalent, read_script, replay, separating_invariant, successors
from .render import render, save_gallery, to_svg
from .structure import dessin_type, invariant_vector, quartic_interpretation


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse already names the offending flag
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _positive(name):
    def conv(text):
        try:
            val = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} expects an integer, got {text!r}") from None
        if val <= 0:
            raise argparse.ArgumentTypeError(f"{name} must be positive, got {val}")
        return val
    return conv


def _positive_float(text):
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--tolerance expects a number, got {text!r}") from None
    if not val > 0:
        raise argparse.ArgumentTypeError(f"--tolerance must be positive, got {val}")
    return val


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    budget = argparse.ArgumentParser(add_help=False)
    budget.add_argument("--budget-vertices", type=_positive("--budget-vertices"))
    budget.add_argument("--budget-states", type=_positive("--budget-states"))
    budget.add_argument("--budget-depth", type=_positive("--budget-depth"))
    threads = argparse.ArgumentParser(add_help=False)
    threads.add_argument("--threads", type=_positive("--threads"), default=1)
    numeric = argparse.ArgumentParser(add_help=False)
    numeric.add_argument("--tolerance", type=_positive_float, default=1e-7)
    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("-o", "--output", help="write the dessin here instead of stdout")

    p = _Parser(prog="dessin", description="Real dessins of trigonal curves and uninodal toiles.")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", parents=[common], help="check the axioms")
    s.add_argument("file")
    s = sub.add_parser("info", parents=[common], help="invariants of a dessin")
    s.add_argument("file")
    s = sub.add_parser("canon", parents=[common], help="canonical hash")
    s.add_argument("file")
    s = sub.add_parser("moves", parents=[common], help="list applicable moves")
    s.add_argument("file")
    s.add_argument("--kinds", help="comma-separated move kinds")
    s = sub.add_parser("apply", parents=[common, out], help="replay a move script")
    s.add_argument("file")
    s.add_argument("script", help="file with one move per line, or '-' for stdin")
    s = sub.add_parser("equiv", parents=[common, budget, threads], help="search for a move path")
    s.add_argument("first")
    s.add_argument("second")
    s.add_argument("--weak", action="store_true", help="allow zigzag moves")
    s = sub.add_parser("cubics", parents=[common, budget], help="cubic classes")
    s = sub.add_parser("toiles", parents=[common, budget, threads], help="enumerate uninodal toiles")
    s.add_argument("--degree", type=_positive("--degree"), default=6)
    s.add_argument("--out", default="atlas", help="output directory (default: ./atlas)")
    s.add_argument("--no-certify", action="store_true", help="skip the move certificates")
    s.add_argument("--no-figures", action="store_true", help="skip the gallery")
    s = sub.add_parser("classify", parents=[common, budget], help="atlas class of a toile")
    s.add_argument("file")
    s.add_argument("--atlas", help="atlas JSON (default: the packaged atlas)")
    s = sub.add_parser("from-weierstrass", parents=[common, numeric, out], help="trace a dessin")
    s.add_argument("file", help="lines 'g2 = c0 c1 ...', 'g3 = ...' and optionally 'n = k'")
    s = sub.add_parser("from-quartic", parents=[common, numeric, out], help="toile of a pointed quartic")
    s.add_argument("file", help="lines 'quartic = c1 ... c15' and 'point = x y z'")
    s.add_argument("--point", help="override the point, as x,y,z")
    s = sub.add_parser("render", parents=[common], help="draw a dessin")
    s.add_argument("file")
    s.add_argument("--format", choices=("dot", "svg", "json", "png"), default="svg")
    s.add_argument("-o", "--output")
    return p


# ----------------------------------------------------------------------
# helpers


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    p = Path(path)
    if not p.exists() and p.parts[:1] == ("fixtures",):
        alt = cl.fixture_dir().joinpath(*p.parts[1:])
        if alt.exists():
            p = alt
    try:
        return p.read_text(encoding="utf-8")
    except OSError as exc:
        raise DessinError(f"cannot read {path}: {exc.strerror}") from None


def _load(path: str):
    return parse(_read_text(path))


def _load_valid(path: str):
    d = _load(path)
    rep = validate(d)
    if rep:
        raise InvalidDessin(f"{path} is not a valid dessin", rep)
    return d


def _budget(args) -> EquivalenceBudget:
    kw = {}
    if getattr(args, "budget_vertices", None):
        kw["max_vertices"] = args.budget_vertices
    if getattr(args, "budget_states", None):
        kw["max_states"] = args.budget_states
    if getattr(args, "budget_depth", None):
        kw["max_depth"] = args.budget_depth
    return EquivalenceBudget(**kw)


def _emit(args, obj, text: str) -> None:
    if args.json:
        sys.stdout.write(json.dumps(obj, indent=1, default=_default) + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _default(x):
    if isinstance(x, (tuple, set, frozenset)):
        return list(x)
    if isinstance(x, bytes):
        return x.hex()
    return str(x)


def _write_dessin(args, d) -> None:
    text = serialize(d)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    elif not args.json:
        sys.stdout.write(text)


def info_dict(d) -> dict:
    prof = boundary_profile(d)
    out = {
        "canonical_hash": canonical_hash(d),
        "vertices": d.n_vertices,
        "edges": d.n_darts // 2,
        "census": d.census(),
        "color_sums": color_sums(d),
        "degree": degree(d),
        "singular_vertices": singular_vertices(d),
        "boundary": prof.to_dict(),
        "type": dessin_type(d),
        "invariants": cl._jsonable(invariant_vector(d)),
    }
    try:
        out["quartic"] = quartic_interpretation(d).to_dict()
    except DessinError:
        pass
    return out


# ----------------------------------------------------------------------
# verbs


def cmd_validate(args) -> int:
    d = _load(args.file)
    rep = validate(d)
    if rep:
        raise InvalidDessin(f"{args.file} is not a valid dessin", rep)
    _emit(args, {"valid": True}, "valid")
    return 0


def cmd_info(args) -> int:
    info = info_dict(_load_valid(args.file))
    lines = [f"{k}: {json.dumps(v, default=_default)}" for k, v in info.items()]
    _emit(args, info, "\n".join(lines))
    return 0


def cmd_canon(args) -> int:
    d = _load_valid(args.file)
    h = canonical_hash(d)
    _emit(args, {"canonical_hash": h, "code": canonical_code(d).hex()}, h)
    return 0


def cmd_moves(args) -> int:
    d = _load_valid(args.file)
    kinds = KINDS
    if args.kinds:
        kinds = tuple(k.strip() for k in args.kinds.split(","))
        bad = [k for k in kinds if k not in KINDS]
        if bad:
            raise UsageError(f"--kinds: unknown move kind {bad[0]!r}")
    sites = [m for m, _ in successors(d, kinds)]
    _emit(args, [{"kind": m.kind, "anchors": list(m.anchors), "color": m.color, "line": m.line()} for m in sites],
          "".join(m.line() + "\n" for m in sites) or "no applicable moves")
    return 0


def cmd_apply(args) -> int:
    d = _load_valid(args.file)
    res = replay(d, read_script(_read_text(args.script)))
    _write_dessin(args, res)
    if args.json:
        _emit(args, {"canonical_hash": canonical_hash(res), "dessin": serialize(res)}, "")
    return 0


def cmd_equiv(args) -> int:
    a, b = _load_valid(args.first), _load_valid(args.second)
    res = equivalent(a, b, allow_weak=args.weak, budget=_budget(args), threads=args.threads)
    text = res.verdict
    if res.invariant:
        text += f" (separated by {res.invariant})"
    if res.moves:
        text += "\n" + "".join(m.line() + "\n" for m in res.moves)
    _emit(args, res.to_dict(), text)
    return 0


def cubics_report(budget: EquivalenceBudget | None = None) -> dict:
    recs = cl.cubic_catalog(certify=True)
    groups = cl.cubic_weak_classes(recs)
    sep = {}
    for i, a in enumerate(recs):
        for b in recs[i + 1:]:
            if a.provenance["weak_class"] != b.provenance["weak_class"]:
                sep[f"{a.name}/{b.name}"] = separating_invariant(a.representative, b.representative, True)
    return {
        "weak_classes": {k: [{"name": r.name, "canonical_hash": r.code, "certificates": r.certificates}
                             for r in v] for k, v in groups.items()},
        "separation": sep,
    }


def cmd_cubics(args) -> int:
    rep = cubics_report(_budget(args))
    lines = []
    for k, members in rep["weak_classes"].items():
        lines.append(f"class {k}: {' '.join(m['name'] for m in members)}")
        for m in members:
            for c in m["certificates"]:
                lines.append(f"  {c['from']} -> {m['name']}: {len(c['moves'])} moves")
    lines.append(f"{len(rep['weak_classes'])} weak classes")
    _emit(args, rep, "\n".join(lines))
    return 0


def toiles_run(degree_: int = 6, out: str | Path | None = None, certify: bool = True,
               budget: EquivalenceBudget | None = None, threads: int = 1, figures: bool = True) -> dict:
    """Build the atlas and, when ``out`` is given, write it with its gallery."""
    if degree_ != 6:
        raise NonGenericInput("only degree-6 toiles (pointed quartics) are enumerated")
    recs = cl.build_atlas(certify=certify, budget=budget, threads=threads)
    atlas = cl.atlas_json(recs)
    counts = {cl.TABLES[t]: sum(1 for r in recs if r.table[0] == t) for t in cl.TABLES}
    atlas["table_counts"] = counts
    if out is not None:
        out = Path(out)
        (out / "gallery").mkdir(parents=True, exist_ok=True)
        (out / "atlas.json").write_text(json.dumps(atlas, indent=1) + "\n", encoding="utf-8")
        if figures:
            for r in recs:
                title = f"{r.name}: {r.label}"
                (out / "gallery" / f"{r.name}.svg").write_text(to_svg(r.representative, title=title),
                                                                encoding="utf-8")
            save_gallery([(f"{r.name}\n{r.label}", r.representative) for r in recs], out / "gallery.png")
    mismatch = {cl.TABLES[t]: (counts[cl.TABLES[t]], n) for t, n in cl.TABLE_SIZES.items()
                if counts[cl.TABLES[t]] != n}
    if mismatch:
        raise ClassCountMismatch(f"table counts differ from the expected layout: {mismatch}")
    return atlas


def cmd_toiles(args) -> int:
    t0 = time.time()
    atlas = toiles_run(args.degree, args.out, not args.no_certify, _budget(args), args.threads,
                       not args.no_figures)
    lines = [f"{r['name']:6} {r['label']}" for r in atlas["classes"]]
    lines += [f"{cap}: {n}" for cap, n in atlas["table_counts"].items()]
    lines.append(f"{len(atlas['classes'])} classes written to {args.out} in {time.time() - t0:.0f}s")
    _emit(args, {"classes": len(atlas["classes"]), "table_counts": atlas["table_counts"],
                 "out": str(args.out)}, "\n".join(lines))
    return 0


def cmd_classify(args) -> int:
    d = _load_valid(args.file)
    atlas = cl.load_atlas(args.atlas) if args.atlas else None
    rec = cl.classify_dessin(d, atlas, _budget(args))
    _emit(args, {"name": rec.name, "label": rec.label, "quartic": rec.quartic,
                 "canonical_hash": rec.code}, f"{rec.name}: {rec.label}")
    return 0


def _read_weierstrass(text: str) -> WeierstrassPair:
    polys = parse_polynomials(text)
    missing = [k for k in ("g2", "g3") if k not in polys]
    if missing:
        raise NonGenericInput(f"missing polynomial {missing[0]!r}")
    g2, g3 = polys["g2"], polys["g3"]
    if "n" in polys:
        n = int(round(polys["n"].array[0]))
    else:
        n = max(1, -(-g2.degree() // 2), -(-g3.degree() // 3))
    return WeierstrassPair(g2, g3, n)


def cmd_from_weierstrass(args) -> int:
    w = _read_weierstrass(_read_text(args.file))
    opts = TraceOptions(root_tol=args.tolerance)
    res = trace(w, opts)
    _write_dessin(args, res.dessin)
    for line in res.log:
        print(line, file=sys.stderr)
    if args.json:
        _emit(args, {"dessin": serialize(res.dessin), "info": info_dict(res.dessin), "log": res.log}, "")
    return 0


def read_quartic(text: str) -> tuple[list[float], list[float] | None]:
    vals: dict[str, list[float]] = {}
    for lno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        name, sep, rest = line.partition("=")
        try:
            vals[name.strip()] = [float(t) for t in rest.split()]
        except ValueError:
            raise NonGenericInput(f"line {lno}: coefficients must be numbers") from None
        if not sep:
            raise NonGenericInput(f"line {lno}: expected 'name = values'")
    coeffs = vals.get("quartic")
    if coeffs is None or len(coeffs) != len(QUARTIC_MONOMIALS):
        raise NonGenericInput("expected 'quartic = ' followed by 15 coefficients")
    point = vals.get("point")
    if point is not None and len(point) != 3:
        raise NonGenericInput("expected 'point = x y z'")
    return coeffs, point


def cmd_from_quartic(args) -> int:
    coeffs, point = read_quartic(_read_text(args.file))
    if args.point:
        try:
            point = [float(t) for t in args.point.split(",")]
        except ValueError:
            raise UsageError("--point: expected x,y,z") from None
        if len(point) != 3:
            raise UsageError("--point: expected x,y,z")
    if point is None:
        raise UsageError("--point: no point given in the file or on the command line")
    res = from_quartic(coeffs, point, TraceOptions(root_tol=args.tolerance), tol=args.tolerance)
    d = res.dessin
    info = info_dict(d)
    try:
        rec = cl.classify_dessin(d)
        cls = {"name": rec.name, "label": rec.label}
    except DessinError as exc:
        cls = {"error": exc.to_dict()}
    _write_dessin(args, d)
    for line in res.log:
        print(line, file=sys.stderr)
    if args.json:
        _emit(args, {"dessin": serialize(d), "info": info, "class": cls, "b0_sampled": res.b0_sampled,
                     "perturbation": res.perturbation}, "")
    elif args.output:
        print(f"{cls.get('name')}: {cls.get('label')} (sampled b0 = {res.b0_sampled})")
    return 0


def cmd_render(args) -> int:
    d = _load_valid(args.file)
    out = render(d, args.format)
    if args.output:
        Path(args.output).write_bytes(out if isinstance(out, bytes) else out.encode("utf-8"))
    elif isinstance(out, bytes):
        sys.stdout.buffer.write(out)
    else:
        sys.stdout.write(out)
    return 0


VERBS = {
    "validate": cmd_validate,
    "info": cmd_info,
    "canon": cmd_canon,
    "moves": cmd_moves,
    "apply": cmd_apply,
    "equiv": cmd_equiv,
    "cubics": cmd_cubics,
    "toiles": cmd_toiles,
    "classify": cmd_classify,
    "from-weierstrass": cmd_from_weierstrass,
    "from-quartic": cmd_from_quartic,
    "render": cmd_render,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return VERBS[args.verb](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"dessin: error: {exc}", file=sys.stderr)
        return 2
    except DessinError as exc:
        print(json.dumps(exc.to_dict(), default=_default), file=sys.stderr)
        return 1


def main() -> None:
    try:
        code = run()
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 2
    sys.exit(code)


if __name__ == "__main__":
    main()
