import numpy as np
import pytest

from sfrc import materials as mm


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def aligned_constants():
    return mm.tandon_weng_constants(mm.PBT, mm.GLASS, 260.0 / 10.9, 0.1822)


@pytest.fixture
def orthotropic_matrix(aligned_constants):
    return mm.plane_stress_matrix(aligned_constants)


acceptance_lines = pytest.StashKey()


def pytest_configure(config):
    config.stash[acceptance_lines] = []


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(acceptance_lines, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
