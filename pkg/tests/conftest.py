import pytest

from hetnet_in.network import NetworkParams

ACCEPTANCE_LINES = {}


def record_acceptance(number, passed, detail):
    """Store one summary line per acceptance criterion (printed at session end)."""
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])


@pytest.fixture(scope="session")
def fig2():
    return NetworkParams()


@pytest.fixture(scope="session")
def small_net():
    return NetworkParams(N1=6, N2=4, alpha1=4.0, alpha2=4.0)
