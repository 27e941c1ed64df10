import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE: list[tuple[str, bool | None, str]] = []


@pytest.fixture
def record():
    """Record one acceptance line: ``record(label, passed, detail)``; ``None`` means informational."""

    def _record(label, passed, detail):
        _ACCEPTANCE.append((label, passed, detail))
        tag = "INFO" if passed is None else ("PASS" if passed else "FAIL")
        print(f"[{tag}] criterion {label}: {detail}")

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in _ACCEPTANCE:
        tag = "INFO" if passed is None else ("PASS" if passed else "FAIL")
        terminalreporter.write_line(f"[{tag}] criterion {label}: {detail}")
