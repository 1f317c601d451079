import random

import pytest

from realdessins.classify import CUBIC_NAMES, fixture_names, load_atlas, load_fixture
from realdessins.moves import successors


@pytest.fixture(scope="session")
def cubics():
    return {name: load_fixture(f"cubic_{name}") for name in CUBIC_NAMES}


@pytest.fixture(scope="session")
def atlas():
    return load_atlas()


@pytest.fixture(scope="session")
def toiles():
    return {n[len("toile_"):]: load_fixture(n) for n in fixture_names() if n.startswith("toile_")}


def random_walk(d, steps, rng, kinds=None):
    """Apply ``steps`` random applicable moves; returns the final dessin and the trail."""
    trail = []
    for _ in range(steps):
        succ = successors(d, kinds) if kinds else successors(d)
        if not succ:
            break
        m, d = rng.choice(succ)
        trail.append((m, d))
    return d, trail


@pytest.fixture
def rng():
    return random.Random(20261016)


_CRITERIA: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid or "::test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.split("::test_criterion_")[1]
    if report.when == "call" or report.outcome != "passed":
        line = next((ln for ln in report.capstdout.splitlines() if ln.startswith("criterion ")), "")
        detail = line.split(": ", 1)[1].split(" ", 1)[1] if ": " in line and " " in line.split(": ", 1)[1] else ""
        _CRITERIA[name] = ("PASS" if report.passed else "FAIL") + (f" {detail}" if detail else "")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA, key=lambda s: int(s.split("_")[0])):
        num, _, label = name.partition("_")
        terminalreporter.write_line(f"criterion {num} ({label.replace('_', ' ')}): {_CRITERIA[name]}")
