import pytest

_results: dict[str, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    label = f"criterion {mark.args[0]} ({item.name})"
    if rep.when == "call" or (rep.when == "setup" and rep.skipped):
        _results[label] = "SKIP" if rep.skipped else ("PASS" if rep.passed else "FAIL")
    elif rep.failed:
        _results[label] = "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for label, status in sorted(_results.items()):
        terminalreporter.write_line(f"{status}  {label}")
