import contextlib

import pytest

_RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance criterion as PASS/FAIL for the terminal summary."""

    @contextlib.contextmanager
    def check(label: str, detail: str = ""):
        info = {"detail": detail}
        try:
            yield info
        except BaseException:
            _RESULTS.append((label, False, info["detail"]))
            raise
        _RESULTS.append((label, True, info["detail"]))

    return check


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in _RESULTS:
        line = f"{'PASS' if ok else 'FAIL'}  {label}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
