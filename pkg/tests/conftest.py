import pytest
from hypothesis import HealthCheck, settings

from vertexfusion.affine import vacuum_module, weyl_module
from vertexfusion.liealg import build_sl

settings.register_profile(
    "default", derandomize=True, deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def sl2():
    return build_sl(2)


@pytest.fixture(scope="session")
def sl3():
    return build_sl(3)


@pytest.fixture(scope="session")
def V4(sl2):
    return vacuum_module(sl2, -1, 4)


@pytest.fixture(scope="session")
def M4(sl2):
    return weyl_module(sl2, 1, -1, 4)
