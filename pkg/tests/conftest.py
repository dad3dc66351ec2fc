import pytest

from _helpers import rotor, table1, table2


@pytest.fixture
def params():
    return table1()


@pytest.fixture
def params_exp():
    return table2()


@pytest.fixture
def rotor3():
    """Three blades at 12000 rpm, 6 cm, 20 m; blade level set per scene."""
    return rotor()


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
