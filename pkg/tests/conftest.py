import pytest

# criterion number -> (title, list of outcomes)
_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(number, title): acceptance criterion checked by this test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            number, title = mark.args
            _CRITERIA.setdefault(number, (title, []))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    # a failure in setup, call or teardown fails the criterion
    if report.when == "call" or report.failed or report.skipped:
        _CRITERIA.setdefault(number, (title, []))[1].append(
            "failed" if report.failed else "skipped" if report.skipped else "passed")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, outcomes = _CRITERIA[number]
        if not outcomes:
            status = "NOT RUN"
        elif all(o == "passed" for o in outcomes):
            status = "PASS"
        elif "failed" in outcomes:
            status = "FAIL"
        else:
            status = "SKIP"
        tr.write_line(f"criterion {number}: {status:<7} {title}")
