import importlib.util

import pytest

HAS_CVXPY = importlib.util.find_spec("cvxpy") is not None

needs_cvxpy = pytest.mark.skipif(not HAS_CVXPY, reason="cvxpy oracle not installed")

# filled by tests/test_acceptance.py, printed once at the end of the session
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
