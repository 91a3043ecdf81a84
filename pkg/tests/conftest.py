import pytest


@pytest.fixture(autouse=True)
def _default_precision(monkeypatch):
    """Every test starts in the default (extended) accumulation mode."""
    monkeypatch.delenv("MB_PRECISION", raising=False)


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion that ran."""
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[number].line())
