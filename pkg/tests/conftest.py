import pytest

_RESULTS: dict = {}


@pytest.fixture
def report():
    """Record one acceptance line: report(criterion, passed, detail)."""

    def _report(criterion: int, passed: bool, detail: str) -> bool:
        _RESULTS.setdefault(criterion, []).append((bool(passed), detail))
        print(f"criterion {criterion}: {'PASS' if passed else 'FAIL'} ({detail})")
        return passed

    return _report


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_RESULTS):
        parts = _RESULTS[crit]
        ok = all(p for p, _ in parts)
        detail = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"criterion {crit:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
