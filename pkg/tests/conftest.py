import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from quantumsets.projmath import Projection  # noqa: E402

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def rng(request):
    # one stream per test, stable across runs and independent of test order
    seed = sum(map(ord, request.node.nodeid)) % (2**32)
    return np.random.default_rng(seed)


@pytest.fixture
def qubit_pair():
    p = Projection(np.diag([1.0, 0.0]))
    q = Projection(np.full((2, 2), 0.5))
    return p, q


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
