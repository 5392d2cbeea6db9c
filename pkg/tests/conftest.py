import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from maxcomm import kernels
from maxcomm.examples import make_bessel_halfline, make_finite_torus, make_grid_1d
from maxcomm.space import build_space

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(params=kernels.available())
def backend(request):
    """Run the test once per available kernel backend."""
    with kernels.using(request.param):
        yield request.param


@pytest.fixture
def line3():
    """Three unit-mass points at 0.5, 1.5, 2.5."""
    return make_grid_1d(3, 3.0)


@pytest.fixture(scope="session")
def grid30():
    return make_grid_1d(30)


@pytest.fixture(scope="session")
def torus64():
    return make_finite_torus(64, 4)


@pytest.fixture(scope="session")
def bessel_small():
    return make_bessel_halfline(1, 60, 20)


def random_space(rng, n, ties=False, metric=True):
    """Random finite space; ``ties`` snaps distances to a coarse grid."""
    if metric:
        x = rng.normal(size=(n, 2))
        d = np.sqrt(((x[:, None, :] - x[None, :, :]) ** 2).sum(-1))
    else:
        d = rng.uniform(0.1, 3.0, size=(n, n))
        d = 0.5 * (d + d.T)
    if ties:
        d = np.ceil(d * 2.0) / 2.0
    np.fill_diagonal(d, 0.0)
    d[d == 0] = 0.5
    np.fill_diagonal(d, 0.0)
    return build_space(range(n), d, rng.uniform(0.2, 2.0, size=n))


# -- acceptance summary: one line per criterion at the end of the run

ACCEPTANCE = {}


@pytest.fixture
def record():
    def _record(number, ok, detail):
        ACCEPTANCE[number] = (bool(ok), detail)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
