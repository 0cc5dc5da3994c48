import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

# One PASS/FAIL line per acceptance criterion, printed after the run so the
# verdicts stay visible even with output capture enabled.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
