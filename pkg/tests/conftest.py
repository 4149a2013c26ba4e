import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num, title = mark.args
    if rep.when == "call" or rep.failed:
        detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
        prev = _RESULTS.get(num)
        ok = rep.passed and (prev is None or prev[1])
        _RESULTS[num] = (title, ok, detail if rep.passed else (detail or rep.longreprtext.splitlines()[-1:]))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_RESULTS):
        title, ok, detail = _RESULTS[num]
        if isinstance(detail, list):
            detail = " ".join(detail)
        tr.write_line(f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {title}  [{detail}]")
