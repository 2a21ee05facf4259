import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import complete_graph, path_graph, star_graph  # noqa: E402

from covertime.chain import rw_from_graph  # noqa: E402


@pytest.fixture
def p3():
    return rw_from_graph(path_graph(3))


@pytest.fixture
def k2():
    return rw_from_graph(path_graph(2))


@pytest.fixture
def k3():
    return rw_from_graph(complete_graph(3))


@pytest.fixture
def k4():
    return rw_from_graph(complete_graph(4))


@pytest.fixture
def star5():
    return star_graph(5)


def write_graph(path: Path, g) -> Path:
    lines = [f"{g.n} {len(g.edges)}"] + [f"{u} {v}" for u, v in g.edges]
    path.write_text("\n".join(lines) + "\n")
    return path


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for key in sorted(results, key=lambda k: int(k[1:])):
            terminalreporter.write_line(results[key])
