import numpy as np
import pytest

from srbzeta.orbits import periodic_table
from srbzeta.unimodal import AnalyticMotion, ConjugatedFamily, Observable, PolynomialFamily, chebyshev

X = Observable.polynomial([0.0, 1.0])
X2 = Observable.polynomial([0.0, 0.0, 1.0])
X4 = Observable.polynomial([0.0, 0.0, 0.0, 0.0, 1.0])
LYAP = Observable.log_abs_derivative()


@pytest.fixture(scope="session")
def cheb():
    return chebyshev()


@pytest.fixture(scope="session")
def motion():
    return AnalyticMotion((1.0,), (-0.2, 0.2))


@pytest.fixture(scope="session")
def conj(cheb, motion):
    return ConjugatedFamily(cheb, motion)


@pytest.fixture(scope="session")
def attracting():
    # (1 - 2x^2) - 0.7(1 - x^2): fixed point 3/13 with multiplier -0.6
    return PolynomialFamily(((0.3, 0.0, -1.3),))


@pytest.fixture(scope="session")
def cheb_tables(cheb):
    """Period tables of 1 - 2x^2 for p = 1..20 (about 20 s, shared by the session)."""
    return {p: periodic_table(cheb, 0.0, p) for p in range(1, 21)}


@pytest.fixture(scope="session")
def sweep_cache():
    return {}


def arcsine_moment(k):
    """Integral of x^k against 1/(pi sqrt(1 - x^2))."""
    if k % 2:
        return 0.0
    out = 1.0
    for j in range(1, k, 2):
        out *= j / (j + 1)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance lines, printed again at the end of the run so they survive capture
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
