import pytest

from sepspec.potential import parse_potential, recenter


@pytest.fixture(scope="session")
def quartic():
    return parse_potential("x^4 - x^2")


@pytest.fixture(scope="session")
def asymmetric():
    return recenter(parse_potential("x^4 - 2*x^2 + 0.5*x"))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS, key=lambda k: int(k[1:])):
            terminalreporter.write_line(RESULTS[key])
