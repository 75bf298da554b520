import numpy as np
import pytest

from moduli_poisson.lie_core import LieGroup

GROUP_NAMES = ["SU(2)", "SU(3)", "SO(3)"]


@pytest.fixture(params=GROUP_NAMES)
def group(request):
    return LieGroup.from_name(request.param)


@pytest.fixture
def su2():
    return LieGroup.su(2)


@pytest.fixture
def su3():
    return LieGroup.su(3)


@pytest.fixture
def so3():
    return LieGroup.so3()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
