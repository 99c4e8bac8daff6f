"""Collects acceptance-criterion outcomes and prints one line per criterion."""
import pytest

_RESULTS = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    # a criterion passes only if every phase of every test tagged with it passes
    if call.excinfo is not None:
        status = "SKIP" if call.excinfo.errisinstance(pytest.skip.Exception) else "FAIL"
    elif call.when == "call":
        status = "PASS"
    else:
        return
    prev = _RESULTS.get(number, (title, "PASS"))[1]
    rank = {"PASS": 0, "SKIP": 1, "FAIL": 2}
    _RESULTS[number] = (title, max(prev, status, key=rank.get))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, status = _RESULTS[number]
        terminalreporter.write_line(f"AC{number} {status:4}  {title}")
