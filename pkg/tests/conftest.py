import pytest

_CHECKLIST = []


@pytest.fixture
def acceptance_log():
    """Collector for one-line acceptance verdicts, echoed after the run."""

    def record(line: str) -> None:
        _CHECKLIST.append(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _CHECKLIST:
        terminalreporter.section("acceptance checklist")
        for line in _CHECKLIST:
            terminalreporter.write_line(line)
