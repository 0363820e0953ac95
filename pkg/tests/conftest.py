import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ampcsim.graph import Graph

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def four_cycle():
    return Graph(4, [0, 1, 2, 3], [1, 2, 3, 0], [1, 2, 3, 4])


@pytest.fixture
def cycle4():
    return four_cycle()


def random_simple_graph(rng, n, m):
    """Distinct non-loop pairs drawn from ``rng``; used by property tests."""
    pairs = set()
    while len(pairs) < m:
        a, b = rng.integers(0, n, size=2)
        if a != b:
            pairs.add((min(a, b), max(a, b)))
    src, dst = zip(*sorted(pairs)) if pairs else ((), ())
    return Graph(n, np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
