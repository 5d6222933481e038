"""Shared pytest hooks: collect acceptance one-liners for the final summary."""

REPORT_LINES: list[str] = []


def record(line: str) -> None:
    REPORT_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if REPORT_LINES:
        terminalreporter.section("acceptance criteria")
        for line in REPORT_LINES:
            terminalreporter.write_line(line)
