"""Shared pytest configuration.

The acceptance tests register one pass/fail line per criterion in
ACCEPTANCE_LINES; echoing them from the terminal-summary hook keeps them
visible even though pytest captures stdout during the tests themselves.
"""

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
