"""Collects the ``criterion`` marks and prints one PASS/FAIL line each."""
import pytest

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    rec = _criteria.setdefault(n, {"title": title, "ok": True, "seconds": 0.0})
    if call.when == "call":
        rec["seconds"] += call.duration
    if call.excinfo is not None and not call.excinfo.errisinstance(pytest.skip.Exception):
        rec["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        rec = _criteria[n]
        status = "PASS" if rec["ok"] else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {status}  ({rec['seconds']:.2f} s)  {rec['title']}")
