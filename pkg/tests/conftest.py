import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_report():
    """Record one pass/fail line per acceptance criterion for the summary."""

    def record(number, title, ok, elapsed, limit, detail=""):
        status = "PASS" if ok else "FAIL"
        limit_txt = f" (limit {limit:g} s)" if limit else ""
        line = f"[{status}] criterion {number:>2}: {title}: {elapsed:.2f} s{limit_txt}"
        if detail:
            line += f"; {detail}"
        _ACCEPTANCE_LINES.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
