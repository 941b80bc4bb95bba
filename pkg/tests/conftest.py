import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from idealknot.io import FIGURE_EIGHT, TREFOIL, sample_fourier

settings.register_profile(
    "seeded", derandomize=True, deadline=None, max_examples=100,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("seeded")


@pytest.fixture(scope="session")
def trefoil96():
    return sample_fourier(TREFOIL, 96)


@pytest.fixture(scope="session")
def figure_eight96():
    return sample_fourier(FIGURE_EIGHT, 96)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    config._acceptance = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(n, ok, detail)``."""
    def record(number, ok, detail=""):
        status = ok if isinstance(ok, str) else ("PASS" if ok else "FAIL")
        request.config._acceptance[number] = (status, detail)
        return ok
    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_acceptance", {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(lines):
        status, detail = lines[number]
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {detail}")
