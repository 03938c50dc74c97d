import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from cyltree.cli import PACKAGE_FIXTURES  # noqa: E402
from cyltree.io import load_window  # noqa: E402


@pytest.fixture
def fx():
    """Load a packaged fixture by name."""
    return lambda name: load_window(os.path.join(PACKAGE_FIXTURES, name + ".json"))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
