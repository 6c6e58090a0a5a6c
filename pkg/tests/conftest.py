import pytest

from potts_chain import parse_angle


@pytest.fixture(scope="session")
def pi5():
    return parse_angle("pi/5")


@pytest.fixture(scope="session")
def pi7():
    return parse_angle("pi/7")


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
