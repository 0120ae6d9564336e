import pytest

from shrinkerlab import alcurve, curve


@pytest.fixture(scope="session")
def circle():
    return curve.circle(n=256)


@pytest.fixture(scope="session")
def circle512():
    return curve.circle(n=512)


@pytest.fixture(scope="session")
def al23():
    return alcurve.al_curve(2, 3, n_points=512)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
