import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hilbertgeom import Interval, Orthant, Product, cube, disk

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def square():
    return cube(2)


@pytest.fixture
def square_product():
    return Product([Interval(-1, 1), Interval(-1, 1)])


@pytest.fixture
def unit_disk():
    return disk()


@pytest.fixture
def orthant2():
    return Orthant(2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
