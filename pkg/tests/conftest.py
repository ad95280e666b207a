import pytest

import cavemech as cm


def pytest_configure(config):
    config._accept_lines = {}


@pytest.fixture(scope="session")
def params():
    return cm.default_params()


@pytest.fixture
def accept(request):
    """Record one acceptance-criterion verdict and assert it.

    Usage: accept(3, ok, "max deviation 4.6e-10"). The collected lines are
    printed together at the end of the run.
    """

    def _record(index: int, passed: bool, detail: str = ""):
        word = "PASS" if passed else "FAIL"
        line = f"ACCEPT-{index:02d} {word}"
        if detail:
            line += f": {detail}"
        request.config._accept_lines[index] = line
        assert passed, line

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_accept_lines", {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for idx in sorted(lines):
            terminalreporter.write_line(lines[idx])
