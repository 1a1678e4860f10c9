"""Shared fixtures.

The expensive full-scale (129 x 129) pipelines are built once per session
and shared between the module tests and the acceptance battery; unit
tests use smaller grids of their own.
"""

import pytest

import pseudosphere.codazzi as cz
import pseudosphere.lift as lf
import pseudosphere.verify as vf


@pytest.fixture(scope="session")
def spec1():
    return cz.default_spec(cz.EXAMPLE1)


@pytest.fixture(scope="session")
def spec2():
    return cz.default_spec(cz.EXAMPLE2)


@pytest.fixture(scope="session")
def spec1_small():
    return cz.default_spec(cz.EXAMPLE1, n1=65, n2=65)


@pytest.fixture(scope="session")
def spec2_small():
    return cz.default_spec(cz.EXAMPLE2, n1=65, n2=65)


@pytest.fixture(scope="session")
def surf1(spec1):
    return cz.build_surface(spec1)


@pytest.fixture(scope="session")
def surf2(spec2):
    return cz.build_surface(spec2)


@pytest.fixture(scope="session")
def surf1_small(spec1_small):
    return cz.build_surface(spec1_small)


@pytest.fixture(scope="session")
def surf2_small(spec2_small):
    return cz.build_surface(spec2_small)


@pytest.fixture(scope="session")
def lifted1(surf1, spec1):
    return lf.lift(surf1, spec1)


@pytest.fixture(scope="session")
def lifted2(surf2, spec2):
    return lf.lift(surf2, spec2)


@pytest.fixture(scope="session")
def bianchi1(lifted1):
    import pseudosphere.bianchi as bt
    return bt.bianchi_transform(lifted1.x)


@pytest.fixture(scope="session")
def bianchi2(lifted2):
    import pseudosphere.bianchi as bt
    return bt.bianchi_transform(lifted2.x)


@pytest.fixture(scope="session")
def report1(spec1):
    return vf.verify_example(spec1)


@pytest.fixture(scope="session")
def report2(spec2):
    return vf.verify_example(spec2)


@pytest.fixture(scope="session")
def ident1(spec1):
    return vf.verify_case_identification(spec1)


@pytest.fixture(scope="session")
def ident2(spec2):
    return vf.verify_case_identification(spec2)


@pytest.fixture(scope="session")
def sweep_report():
    return vf.sweep_image_curvature()


def check_by_name(report, name):
    for c in report.checks:
        if c.name == name:
            return c
    raise KeyError(name)


# one summary line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
