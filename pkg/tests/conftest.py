from __future__ import annotations

import os

import pytest

from hyperslice.reduced import Composition, build_grid


@pytest.fixture(scope="session")
def grid_q10():
    return build_grid(Composition((6, 1, 1, 1, 1)))


@pytest.fixture(scope="session")
def grid_q6():
    return build_grid(Composition((3, 1, 1, 1)))


def pytest_collection_modifyitems(config, items):
    if os.environ.get("HYPERSLICE_SKIP_SLOW"):
        skip = pytest.mark.skip(reason="HYPERSLICE_SKIP_SLOW is set")
        for item in items:
            if "slow" in item.keywords:
                item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    verdicts = getattr(mod, "VERDICTS", None)
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for line in verdicts:
            terminalreporter.write_line(line)
