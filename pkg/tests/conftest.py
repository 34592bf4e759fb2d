import sys

import numpy as np
import pytest

from grouplattice.groups import build_group
from grouplattice.lattice import GroupLattice

TRANSPOSITIONS_S3 = ["(12)", "(13)", "(23)"]
TRANSPOSITIONS_S4 = ["(12)", "(13)", "(14)", "(23)", "(24)", "(34)"]
A4_S = ["(123)", "(243)", "(134)", "(142)"]

LATTICE_SPECS = {
    "z4": ("Z(4)", ["1", "2"]),
    "s3": ("S(3)", TRANSPOSITIONS_S3),
    "z6": ("Z(6)", ["1", "2", "3"]),
}


def make_lattice(spec, S, **kwargs):
    return GroupLattice(build_group(spec), S, **kwargs)


@pytest.fixture(scope="session")
def s3():
    return make_lattice("S(3)", TRANSPOSITIONS_S3)


@pytest.fixture(scope="session")
def z4():
    return make_lattice("Z(4)", ["1", "2"])


@pytest.fixture(scope="session")
def z6():
    return make_lattice("Z(6)", ["1", "2", "3"])


@pytest.fixture(scope="session")
def a4():
    return make_lattice("A(4)", A4_S)


@pytest.fixture(scope="session", params=sorted(LATTICE_SPECS))
def lattice(request):
    spec, S = LATTICE_SPECS[request.param]
    return make_lattice(spec, S)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for i in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[i])
