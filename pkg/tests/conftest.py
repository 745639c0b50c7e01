"""Shared fixtures: suite wall-clock tracking and the acceptance-line
reporter that replays one verdict line per criterion after capture ends."""

import time

import pytest

_T0 = time.time()
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def suite_elapsed():
    """Callable returning seconds since the test session started."""
    return lambda: time.time() - _T0


@pytest.fixture(scope="session")
def criterion_reporter():
    """emit(k, ok, summary) prints and records one acceptance line."""

    def emit(k, ok, summary):
        line = f"C{k} {'PASS' if ok else 'FAIL'} — {summary}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_line("")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def pytest_sessionfinish(session, exitstatus):
    print(f"\ntotal suite wall time: {time.time() - _T0:.1f}s (budget 60s)")
