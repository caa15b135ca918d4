import pytest

from torus_growth.matrix_algebra import IntMatrix, prepare

SOL = IntMatrix(((2, 1), (1, 1)))
PAIR = IntMatrix(((2, 1, 0, 0), (1, 1, 0, 0), (0, 0, 3, 1), (0, 0, 2, 1)))


@pytest.fixture(scope="session")
def sol():
    return prepare(SOL)[1]


@pytest.fixture(scope="session")
def pair_setup():
    return prepare(PAIR)[1]


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = mod.summary_lines() if mod else []
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
