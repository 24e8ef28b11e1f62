import numpy as np
import pytest

from geospca import DataMatrix

# lines collected by the acceptance suite, echoed after the run
ACCEPTANCE_LINES = []


@pytest.fixture
def fixture_matrix():
    """Four columns where the two heaviest are nearly but not exactly collinear."""
    return DataMatrix.from_array([[-0.25, 0.25, 1.0, 1.0], [1.0, 1.0, 0.0, 0.0]], center=False)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
