import numpy as np
import pytest

from photonwf import FrequencyGrid, make_gaussian_amplitude

# filled by test_acceptance.py, printed after the run
ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def grid():
    return FrequencyGrid(4.0, 16.0, 512)


@pytest.fixture(scope="session")
def packet(grid):
    return make_gaussian_amplitude(10.0, 1.0, grid)


@pytest.fixture(scope="session")
def wide_grid():
    # reaches 9 bandwidths from the center, so edge truncation is negligible
    return FrequencyGrid(1.0, 19.0, 768)


@pytest.fixture(scope="session")
def wide_packet(wide_grid):
    return make_gaussian_amplitude(10.0, 1.0, wide_grid)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
