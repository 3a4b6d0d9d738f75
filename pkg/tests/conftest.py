import math

import numpy as np
import pytest

from sumimo.numerics import make_rng

SIGMA_H = math.sqrt(0.5)


@pytest.fixture
def rng():
    return make_rng(12345)


def random_qpsk(rng, shape):
    return (1 - 2.0 * rng.integers(0, 2, shape)) + 1j * (1 - 2.0 * rng.integers(0, 2, shape))


@pytest.fixture
def qpsk():
    return random_qpsk


# filled by the acceptance suite, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
