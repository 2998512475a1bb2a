import numpy as np
import pytest

from metrocross.optimizer import OptimizerOptions


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def fast_opt():
    return OptimizerOptions(n_starts=8)


def bell():
    return np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def dm(psi):
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
