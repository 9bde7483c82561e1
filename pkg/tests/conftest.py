import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from stablelp.density import StableParams
from stablelp.fixtures import fixture

settings.register_profile(
    "default", max_examples=25, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("default")

ACCEPTANCE_LINES: list = []


@pytest.fixture(scope="session")
def p15():
    return StableParams(1.5)


@pytest.fixture(scope="session")
def p1():
    return StableParams(1.0)


@pytest.fixture(scope="session")
def cos_fixture():
    return fixture("cos")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
