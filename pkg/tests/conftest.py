from __future__ import annotations

import os
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

# (criterion number, title, passed, detail), filled by test_acceptance
ACCEPTANCE_LOG: list[tuple[int, str, bool, str]] = []


def fixture_path(name: str) -> Path | None:
    """Locate a price fixture in tests/fixtures or $CRASHSTATS_FIXTURES."""
    candidates = [FIXTURES / name]
    extra = os.environ.get("CRASHSTATS_FIXTURES")
    if extra:
        candidates.insert(0, Path(extra) / name)
    for path in candidates:
        if path.is_file():
            return path
    return None


@pytest.fixture(scope="session")
def sp500_path() -> Path:
    return FIXTURES / "sp500_2006_2012.csv"


@pytest.fixture(scope="session")
def nasdaq_path() -> Path:
    return FIXTURES / "nasdaq_2006_2012.csv"


YAHOO = "date=Date,close=Adj Close"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE_LOG):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {title} :: {detail}")
