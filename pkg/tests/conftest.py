import pytest


def pytest_terminal_summary(terminalreporter):
    # one verdict line per acceptance criterion, whatever the capture mode
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(VERDICTS):
        terminalreporter.write_line(VERDICTS[number])
