import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from hnamc import fixture_path  # noqa: E402


@pytest.fixture
def fixtures():
    return fixture_path


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
