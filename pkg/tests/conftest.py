import numpy as np
import pytest

from geoheat.datasets import make_disk, make_icosphere, make_square


@pytest.fixture
def square():
    return make_square()


@pytest.fixture(scope="session")
def small_disk():
    return make_disk(12)


@pytest.fixture(scope="session")
def disk5k():
    return make_disk(40)


@pytest.fixture(scope="session")
def disk10k():
    return make_disk(57)


@pytest.fixture(scope="session")
def sphere10k():
    return make_icosphere(5)


@pytest.fixture(scope="session")
def small_sphere():
    return make_icosphere(3)


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the test then asserts the outcome."""
    lines = request.config.stash[_ACCEPTANCE]

    def record(label, ok, detail):
        lines.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
