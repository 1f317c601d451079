import json
import subprocess
import sys

import pytest

from realdessins.classify import fixture_dir, load_fixture
from realdessins.cli import run
from realdessins.core import canonical_code, canonical_hash
from realdessins.fileio import from_json, parse, serialize
from realdessins.moves import applicable_moves, replay, write_script
from realdessins.render import render, to_svg


def fx(name):
    return str(fixture_dir() / f"{name}.dss")


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_validate_and_canon(capsys):
    assert call(capsys, "validate", fx("cubic_I2"))[:2] == (0, "valid\n")
    code, out, _ = call(capsys, "canon", fx("cubic_I2"))
    assert code == 0 and out.strip() == canonical_hash(load_fixture("cubic_I2"))


def test_relative_fixture_paths(capsys):
    assert call(capsys, "validate", "fixtures/cubic_II1.dss")[0] == 0


def test_domain_errors_are_json_on_stderr(capsys, tmp_path):
    code, out, err = call(capsys, "classify", fx("cubic_I0"))
    assert code == 1 and out == ""
    assert json.loads(err)["error"] == "not_a_toile"
    code, _, err = call(capsys, "validate", str(tmp_path / "missing.dss"))
    assert code == 1 and "error" in json.loads(err)


def test_invalid_dessin_exits_one(capsys, tmp_path):
    text = serialize(load_fixture("cubic_II1")).replace("(close)", "")
    bad = tmp_path / "bad.dss"
    bad.write_text(text)
    code, _, err = call(capsys, "info", str(bad))
    assert code == 1 and json.loads(err)["error"]


@pytest.mark.parametrize("argv, flag", [
    (["render", "--format", "bogus", "x"], "--format"),
    (["toiles", "--threads", "0"], "--threads"),
    (["equiv", "a", "b", "--budget-states", "-3"], "--budget-states"),
    (["from-weierstrass", "x", "--tolerance", "nan"], "--tolerance"),
])
def test_usage_errors_exit_two(capsys, argv, flag):
    with pytest.raises(SystemExit) as exc:
        run(argv)
    assert exc.value.code == 2
    assert flag in capsys.readouterr().err


def test_bad_point_is_a_usage_error(capsys, tmp_path):
    q = tmp_path / "q.txt"
    q.write_text("quartic = 1 0 0 0 0 0 0 0 0 0 1 0 0 0 -1\n")
    code, _, err = call(capsys, "from-quartic", str(q), "--point", "1,2")
    assert code == 2 and "--point" in err


def test_entry_point_exit_codes(tmp_path):
    base = [sys.executable, "-m", "realdessins.cli"]
    ok = subprocess.run(base + ["validate", fx("cubic_H")], capture_output=True, text=True)
    assert ok.returncode == 0
    usage = subprocess.run(base + ["render", "--format", "gif", fx("cubic_H")], capture_output=True, text=True)
    assert usage.returncode == 2 and "--format" in usage.stderr
    dom = subprocess.run(base + ["canon", str(tmp_path / "none.dss")], capture_output=True, text=True)
    assert dom.returncode == 1 and json.loads(dom.stderr)


def test_moves_and_apply(capsys, tmp_path):
    d = load_fixture("cubic_II1")
    code, out, _ = call(capsys, "moves", "--json", fx("cubic_II1"))
    listed = json.loads(out)
    assert code == 0 and len(listed) == len(applicable_moves(d))
    script = tmp_path / "s.txt"
    sites = applicable_moves(d)[:1]
    script.write_text(write_script(sites))
    code, out, _ = call(capsys, "apply", fx("cubic_II1"), str(script))
    assert code == 0 and canonical_code(parse(out)) == canonical_code(replay(d, sites))


def test_equiv_reports_the_separating_invariant(capsys):
    code, out, _ = call(capsys, "equiv", "--json", "--weak", fx("cubic_I1"), fx("cubic_II1"))
    res = json.loads(out)
    assert code == 0 and res["verdict"] == "no" and res["invariant"] == "type"


def test_equiv_path_replays(capsys):
    from realdessins.moves import MoveSite

    code, out, _ = call(capsys, "equiv", "--json", "--weak", fx("cubic_I0"), fx("cubic_I1"))
    res = json.loads(out)
    assert res["verdict"] == "yes"
    end = replay(load_fixture("cubic_I0"), map(MoveSite.parse_line, res["moves"]))
    assert canonical_code(end) == canonical_code(load_fixture("cubic_I1"))


def test_render_matches_the_library(capsys):
    d = load_fixture("toile_T5_2")
    code, out, _ = call(capsys, "render", "--format", "svg", fx("toile_T5_2"))
    assert code == 0 and out == to_svg(d)
    assert out.count('class="node"') == 1
    assert 'class="node"' not in render(load_fixture("cubic_II1"), "svg")


def test_render_dot_has_a_cluster_per_circle(capsys):
    for name in ("cubic_I2", "cubic_H"):
        _, out, _ = call(capsys, "render", "--format", "dot", fx(name))
        assert out.count("subgraph cluster_boundary") == len(load_fixture(name).boundary)


def test_render_json_round_trip(capsys):
    _, out, _ = call(capsys, "render", "--format", "json", fx("cubic_I1"))
    assert canonical_code(from_json(json.loads(out))) == canonical_code(load_fixture("cubic_I1"))


def test_render_png_to_file(capsys, tmp_path):
    target = tmp_path / "h.png"
    assert call(capsys, "render", "--format", "png", "-o", str(target), fx("cubic_H"))[0] == 0
    assert target.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_classify_toile(capsys):
    code, out, _ = call(capsys, "classify", "--json", fx("toile_T4_4"))
    assert code == 0 and json.loads(out)["name"] == "T4.4"


def test_cubics_verb(capsys):
    code, out, _ = call(capsys, "cubics", "--json")
    rep = json.loads(out)
    assert code == 0 and len(rep["weak_classes"]) == 3


def test_from_weierstrass(capsys, tmp_path):
    w = tmp_path / "w.txt"
    w.write_text("g2 = 1 0 -3\ng3 = 0.3 1 0 -1\n")
    code, out, err = call(capsys, "from-weierstrass", str(w))
    assert code == 0 and parse(out).n_vertices > 0
    code, _, err = call(capsys, "from-weierstrass", str(tmp_path / "nope.txt"))
    assert code == 1 and json.loads(err)
