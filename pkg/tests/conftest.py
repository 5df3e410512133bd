import time

import pytest

_LOG = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LOG] = []


class Criterion:
    """Times one acceptance criterion and logs a pass/fail line for the summary."""

    def __init__(self, log, capsys):
        self.log = log
        self.capsys = capsys

    def run(self, number, title, limit, check):
        start = time.perf_counter()
        try:
            detail = check()
        except BaseException as e:
            self._emit(f"FAIL criterion {number}: {title} ({type(e).__name__}: {e})")
            raise
        elapsed = time.perf_counter() - start
        ok = elapsed < limit
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} [{elapsed:.2f}s, limit {limit}s]"
        self._emit(line + (f" {detail}" if detail else ""))
        assert ok, f"criterion {number} took {elapsed:.2f}s, limit {limit}s"

    def _emit(self, line):
        self.log.append(line)
        with self.capsys.disabled():
            print("\n" + line)


@pytest.fixture
def criterion(request, capsys):
    return Criterion(request.config.stash[_LOG], capsys)


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LOG, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
