import numpy as np
import pytest
from hypothesis import settings

from framecurv import zoo

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def s2():
    return zoo.sphere2().manifold


@pytest.fixture(scope="session")
def s3():
    return zoo.sphere3()


@pytest.fixture(scope="session")
def seven():
    return zoo.seven_manifold()


@pytest.fixture(scope="session")
def h2():
    return zoo.hyperbolic().manifold


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
