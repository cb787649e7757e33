import pytest

_LINES = []


@pytest.fixture(scope="session")
def criterion_log():
    """Collect one pass/fail line per acceptance criterion."""
    def record(k, ok, detail):
        _LINES.append((k, f"{'PASS' if ok else 'FAIL'} criterion {k:>2}: {detail}"))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_LINES):
        terminalreporter.write_line(line)
