import contextlib
import time

import pytest

_RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    """``with criterion("1", "label") as notes:`` records one pass/fail line for the summary.

    Strings appended to ``notes`` are shown after the timing.
    """

    @contextlib.contextmanager
    def record(number: str, label: str):
        start = time.perf_counter()
        notes: list[str] = []
        try:
            yield notes
        except BaseException as exc:
            _RESULTS.append((number, False, f"{label} ({type(exc).__name__}: {exc})"[:200]))
            raise
        extra = "".join(f"; {n}" for n in notes)
        _RESULTS.append((number, True, f"{label} [{time.perf_counter() - start:.2f} s{extra}]"))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, text in sorted(_RESULTS, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {number}: {text}")
