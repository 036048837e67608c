import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from weyl_forge.axis_measure import AxisMeasure
from weyl_forge.profile_geometry import ProfileCurve
from weyl_forge.weyl_metric import WeylSolution

settings.register_profile(
    "weyl",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
    derandomize=True,
)
settings.load_profile("weyl")


@pytest.fixture(scope="session")
def flat():
    return WeylSolution.flat()


@pytest.fixture(scope="session")
def curzon1():
    return WeylSolution.from_measure(AxisMeasure.curzon(1.0))


@pytest.fixture(scope="session")
def schwarzschild1():
    return WeylSolution.from_measure(AxisMeasure.schwarzschild(1.0))


@pytest.fixture(scope="session")
def unit_sphere():
    return ProfileCurve.sphere(1.0, 65)


def schwarzschild_sphere(a, m=1.0, n=65):
    """Weyl image of the areal-radius-a sphere of the Schwarzschild metric of mass m."""
    return ProfileCurve.from_functions(lambda t: np.sqrt(a * a - 2 * m * a) * np.sin(t),
                                       lambda t: (a - m) * np.cos(t), n=n)


def pear(n=65, eps=0.2):
    return ProfileCurve.from_functions(np.sin, lambda t: np.cos(t) + eps * np.cos(2 * t), n=n)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
