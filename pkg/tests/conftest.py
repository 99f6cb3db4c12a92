import pytest

from bvlab.experiments.scenarios import prepared
from bvlab.space import DomainSpec

ACCEPTANCE = {}


@pytest.fixture(scope="session")
def square32():
    return prepared(DomainSpec("unit-square", 1 / 32))


@pytest.fixture(scope="session")
def square64():
    return prepared(DomainSpec("unit-square", 1 / 64))


@pytest.fixture(scope="session")
def acceptance():
    return ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.rstrip("ab")), k)):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
