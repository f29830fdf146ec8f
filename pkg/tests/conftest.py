import pytest

from kagome.chain import GENERAL
from kagome.exact import enumerate_tilings
from kagome.lattice import make_lozenge_region, make_nonflat_lozenge, make_square_region


@pytest.fixture(scope="session")
def loz2():
    return make_lozenge_region(2)


@pytest.fixture(scope="session")
def loz3():
    return make_lozenge_region(3)


@pytest.fixture(scope="session")
def sq3():
    return make_square_region(3)


@pytest.fixture(scope="session")
def nf3():
    return make_nonflat_lozenge(3)


@pytest.fixture(scope="session")
def loz2_graph(loz2):
    return enumerate_tilings(loz2)


@pytest.fixture(scope="session")
def loz2_graph_restrained(loz2):
    return enumerate_tilings(loz2, flips="restrained")


@pytest.fixture(scope="session")
def loz3_graph(loz3):
    return enumerate_tilings(loz3)


@pytest.fixture(scope="session")
def sq3_graph(sq3):
    return enumerate_tilings(sq3)
