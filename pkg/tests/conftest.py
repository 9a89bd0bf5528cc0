import numpy as np
import pytest
from hypothesis import settings

from relcollapse import gadgets

settings.register_profile("repo", deadline=None, max_examples=60)
settings.load_profile("repo")

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def fig1():
    return gadgets.fig1()


@pytest.fixture(scope="session")
def fig2():
    return gadgets.fig2()


@pytest.fixture(scope="session")
def fig3():
    return gadgets.fig3()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_state(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
