import pytest

from geosigma.medium import make_field

SMOOTH = "1+0.5*sin(2*pi*x1)^2*sin(2*pi*x2)^2"
LAMINATE = "1+0.5*sin(2*pi*x1)^2"


@pytest.fixture(scope="session")
def one():
    return make_field("1")


@pytest.fixture(scope="session")
def four():
    return make_field("4")


@pytest.fixture(scope="session")
def smooth():
    return make_field(SMOOTH)


@pytest.fixture(scope="session")
def laminate():
    return make_field(LAMINATE)


ACCEPTANCE_LINES = []


def record(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
