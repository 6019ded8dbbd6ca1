import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mpcop.copula import build_copula  # noqa: E402


@pytest.fixture(scope="session")
def small_copula():
    """Lag-1 copula at s=0.4 on a modest orbit; shared by the quick tests."""
    return build_copula(0.4, 1, n=200_000, m=2_000, extra_lags=(2,))


@pytest.fixture(scope="session")
def small_copula_h2():
    return build_copula(0.1, 2, n=200_000, m=2_000)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for num in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[num])
