import math

import numpy as np
import pytest

from kickedtop.model import _space


@pytest.fixture(scope="session")
def space():
    """Cached spin spaces keyed by j."""
    return _space


@pytest.fixture
def rng():
    return np.random.default_rng(20221014)


def random_point(rng):
    from kickedtop.spin import SphericalPoint

    return SphericalPoint(math.acos(rng.uniform(-1, 1)), rng.uniform(0, 2 * math.pi))


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
