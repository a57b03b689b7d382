import numpy as np
import pytest

from vortexorbits.domain import make_free_plane, make_radial_power, make_unit_disk, make_user_g
from vortexorbits.dynamics import VortexConfig


@pytest.fixture(scope="session")
def disk():
    return make_unit_disk()


@pytest.fixture(scope="session")
def radial2():
    return make_radial_power(2.0)


@pytest.fixture(scope="session")
def free_plane():
    return make_free_plane()


@pytest.fixture(scope="session")
def isochronous():
    # h(z) = |z|^2: every level circle has the same period
    return make_user_g(lambda z, w: 0.5 * (np.sum(z * z, axis=-1) + np.sum(w * w, axis=-1)))


@pytest.fixture(scope="session")
def half_half():
    return VortexConfig(0.5, 0.5)


@pytest.fixture(scope="session")
def opposite():
    return VortexConfig(1.5, -0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def criterion_log(request):
    log = getattr(request.config, "_criterion_log", None)
    if log is None:
        log = request.config._criterion_log = {}
    return log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = getattr(config, "_criterion_log", None)
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(log):
        ok, detail = log[key]
        terminalreporter.write_line(f"criterion {key:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
