import itertools
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from degcorr import from_edge_list  # noqa: E402

PATH3 = [(0, 1), (1, 2)]
STAR3 = [(0, 1), (0, 2), (0, 3)]
CYCLE4 = [(0, 1), (1, 2), (2, 3), (3, 0)]
K4 = list(itertools.combinations(range(4), 2))
PETERSEN = [(i, (i + 1) % 5) for i in range(5)] + [(i, i + 5) for i in range(5)] \
    + [(5 + i, 5 + (i + 2) % 5) for i in range(5)]

NAMED = {"P3": (3, PATH3), "K13": (4, STAR3), "C4": (4, CYCLE4), "K4": (4, K4), "Petersen": (10, PETERSEN)}


def random_small_graphs(count: int, seed: int, max_n: int = 8):
    """Random simple graphs on 2..max_n nodes with at least one edge."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(2, max_n + 1))
        p = rng.uniform(0.15, 0.9)
        edges = [e for e in itertools.combinations(range(n), 2) if rng.random() < p]
        if edges:
            out.append((n, edges))
    return out


@pytest.fixture
def named_graphs():
    return {k: from_edge_list(n, e) for k, (n, e) in NAMED.items()}


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":").lstrip("C"))):
            terminalreporter.write_line(line)
