import pytest

from jumploci.algebra import PrimeField
from jumploci.sheafkit import (
    make_m12,
    make_type02,
    make_type03_general,
    make_type03_nongeneral,
)

E02_MATRIX = [["x0", "0"], ["x1", "x0"], ["x2", "x1"], ["0", "x2"]]
E03_QUADRICS = ["x0^2", "x1^2", "x2^2"]
E03NG_LINE = "x2"
E03NG_PSI = ["x0*x1^2", "-x0^2*x1", "x0^3+x1^3"]
EM12_LINE = "x2"
EM12_PSI = ["x0^2", "x1^2"]


@pytest.fixture(scope="session")
def field():
    return PrimeField(32003)


@pytest.fixture(scope="session")
def e02(field):
    return make_type02(field, E02_MATRIX)


@pytest.fixture(scope="session")
def e03(field):
    return make_type03_general(field, E03_QUADRICS)


@pytest.fixture(scope="session")
def e03ng(field):
    return make_type03_nongeneral(field, E03NG_LINE, E03NG_PSI)


@pytest.fixture(scope="session")
def em12(field):
    return make_m12(field, EM12_LINE, EM12_PSI)


@pytest.fixture(scope="session")
def all_families(e02, e03, e03ng, em12):
    return [e02, e03, e03ng, em12]
