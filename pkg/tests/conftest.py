import math

import pytest
from hypothesis import HealthCheck, settings

from qtrap.dynamics import constant_profile, integrate_epsilon, mathieu_profile

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# acceptance tests append (number, passed, detail) here; printed at session end
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def harmonic_sol():
    return integrate_epsilon(constant_profile(1.0), 0.0, 20.0)


@pytest.fixture(scope="session")
def free_sol():
    return integrate_epsilon(constant_profile(0.0), 0.0, 10.0)


@pytest.fixture(scope="session")
def mathieu_sol():
    # a=0, q=0.4, omega=2: period pi, ten periods
    return integrate_epsilon(mathieu_profile(0.0, 0.4, 2.0), 0.0, 10 * math.pi)
