import math

import pytest

from steklov_geom import verify
from steklov_geom.surface import FlatCylinder, build_surface, triangulate


@pytest.fixture(scope="session")
def bench():
    """Zoo analyses shared by every test in the session."""
    return verify.Workbench()


@pytest.fixture(scope="session")
def unit_cylinder():
    return build_surface(FlatCylinder(1.0, 1.0), name="cyl-unit")


@pytest.fixture(scope="session")
def unit_cylinder_mesh(unit_cylinder):
    return triangulate(unit_cylinder, 0.05)


@pytest.fixture(scope="session")
def coarse_cylinder_mesh(unit_cylinder):
    return triangulate(unit_cylinder, math.pi / 4)


ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
