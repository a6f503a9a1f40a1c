import functools

import numpy as np
import pytest

from toruslab import suites, zoo
from toruslab.geometry import evaluate_geometry

SURFACES = {
    "clifford3": lambda: zoo.clifford(3),
    "clifford4": lambda: zoo.clifford(4),
    "bimr5": lambda: zoo.bimr(5),
    "nonisotropic5": lambda: zoo.nonisotropic(5),
}


@functools.lru_cache(maxsize=None)
def geometry(name, shape=(64, 64), normalized=False):
    imm = SURFACES[name]()
    if normalized:
        return suites.normalized_geometry(imm, shape)
    return evaluate_geometry(imm, shape=shape)


@pytest.fixture(params=sorted(SURFACES))
def surface_name(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
