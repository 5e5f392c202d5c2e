import numpy as np
import pytest

from banachpolar import LpSpace, QuadraticSpace, random_spd

ACCEPTANCE_LINES = []


def spd_spaces(count=3, dim=3, first_seed=101):
    return [QuadraticSpace(random_spd(dim, np.random.default_rng(first_seed + k))) for k in range(count)]


# one of each flavour the properties are checked on
SPACES = [LpSpace(3, 1.5), LpSpace(3, 2.0), LpSpace(3, 3.0), LpSpace(5, 4.0), LpSpace(4, 1.25)] + spd_spaces(2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=SPACES, ids=str)
def space(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
