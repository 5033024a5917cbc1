"""Collect acceptance outcomes and print one pass/fail line per criterion."""

from collections import OrderedDict

import pytest

_CRITERIA: "OrderedDict[int, dict]" = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            number, title = mark.args
            _CRITERIA.setdefault(number, {"title": title, "passed": 0, "failed": 0, "details": []})


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    entry = _CRITERIA[mark.args[0]]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        entry["passed" if report.passed else "failed"] += 1
        for key, value in item.user_properties:
            if key == "measured":
                entry["details"].append(value)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        ran = entry["passed"] + entry["failed"]
        if ran == 0:
            status = "NOT RUN"
        else:
            status = "PASS" if entry["failed"] == 0 else "FAIL"
        line = f"{status} criterion {number:2d}: {entry['title']} ({entry['passed']}/{ran} checks)"
        terminalreporter.write_line(line)
        for detail in entry["details"]:
            terminalreporter.write_line(f"      {detail}")
