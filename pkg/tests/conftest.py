import sys

import pytest

from lorafair import NodeReport


@pytest.fixture
def reports():
    def make(gains):
        return [NodeReport(i, float(g)) for i, g in enumerate(gains)]

    return make


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("tests.test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
