import contextlib

import pytest

_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record the outcome of one acceptance criterion for the summary."""

    @contextlib.contextmanager
    def record(number, description):
        detail = {}
        try:
            yield detail
        except BaseException as exc:
            _CRITERIA[number] = ("FAIL", description, f"{type(exc).__name__}: {exc}".splitlines()[0])
            raise
        _CRITERIA[number] = ("PASS", description, detail.get("note", ""))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        status, description, note = _CRITERIA[number]
        line = f"criterion {number}: {status} - {description}"
        terminalreporter.write_line(line + (f" ({note})" if note else ""))
