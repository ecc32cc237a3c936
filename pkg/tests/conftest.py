import time

import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): one acceptance criterion")


@pytest.fixture
def report(request):
    """Attach a one-line detail (observed values vs tolerance) to an acceptance test."""
    lines = []
    request.node.user_properties.append(("detail", lines))
    start = time.perf_counter()
    yield lines.append
    request.node.user_properties.append(("elapsed", time.perf_counter() - start))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    props = dict(item.user_properties)
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        _RESULTS[number] = [title, rep.passed, props.get("detail", []), None]
    elif rep.when == "teardown" and number in _RESULTS:
        _RESULTS[number][3] = props.get("elapsed")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, passed, detail, elapsed = _RESULTS[number]
        timing = f" [{elapsed:.1f} s]" if elapsed is not None else ""
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status} {number:2d}. {title}{timing}")
        for line in detail:
            terminalreporter.write_line(f"         {line}")
