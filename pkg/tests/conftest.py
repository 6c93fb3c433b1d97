import numpy as np
import pytest

from scpd.graph import build_snapshot


def path_graph(n, t=1):
    return build_snapshot(t, [(i, i + 1) for i in range(n - 1)])


def complete_graph(n, t=1):
    return build_snapshot(t, [(i, j) for i in range(n) for j in range(i + 1, n)])


def star_graph(n, t=1):
    return build_snapshot(t, [(0, j) for j in range(1, n)])


def random_graph(n, p, seed, t=1):
    rng = np.random.default_rng(seed)
    i, j = np.triu_indices(n, 1)
    keep = rng.random(len(i)) < p
    return build_snapshot(t, np.column_stack([i[keep], j[keep]]), node_ids=np.arange(n))


@pytest.fixture
def graphs():
    return {
        "P2": path_graph(2),
        "P3": path_graph(3),
        "K3": complete_graph(3),
        "S4": star_graph(5),
        "G40": random_graph(40, 0.15, 3),
    }


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_report():
    def report(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
