import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from singint import GridSpec, Field

settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


def random_field(grid, rng, smooth=False):
    v = rng.standard_normal(grid.sizes) + 1j * rng.standard_normal(grid.sizes)
    if smooth:
        spec = np.fft.fftn(v)
        k2 = sum(k**2 for k in grid.frequency_mesh())
        v = np.fft.ifftn(spec * np.exp(-k2 / 50.0))
    return Field(grid, v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def grid64():
    return GridSpec.square(2, 64)


@pytest.fixture(scope="session")
def grid128():
    return GridSpec.square(2, 128)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
