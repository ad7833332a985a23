import pytest

_verdicts = {}


def pytest_runtest_logreport(report):
    mark = getattr(report, "criterion", None)
    if mark is None:
        return
    # a criterion fails if any phase of its test fails
    if report.failed or report.when == "call":
        prev = _verdicts.get(mark, "PASS")
        _verdicts[mark] = "FAIL" if report.failed or prev == "FAIL" else "PASS"


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        outcome.get_result().criterion = tuple(mark.args)


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), verdict in sorted(_verdicts.items()):
        terminalreporter.write_line(f"{verdict} criterion {number}: {title}")
