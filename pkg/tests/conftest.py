import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from markedlength import MarkedGroup, ScaledMetric, WordMetric  # noqa: E402


@pytest.fixture(scope="session")
def F2():
    return MarkedGroup.free(2)


@pytest.fixture(scope="session")
def S1(F2):
    return WordMetric(F2)


@pytest.fixture(scope="session")
def S2(F2):
    return WordMetric(F2, ["a", "b", "ab"])


@pytest.fixture(scope="session")
def D2(S1):
    return ScaledMetric(S1, 2)


@pytest.fixture(scope="session")
def ZZ():
    return MarkedGroup.free_product([("free", 1), ("free", 1)])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
