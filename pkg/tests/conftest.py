import pytest

from gowsn import FieldSpec, make_board


@pytest.fixture
def benchmark_field():
    return FieldSpec(100.0, 100.0, 7.0)


@pytest.fixture
def benchmark_board(benchmark_field):
    return make_board(benchmark_field, 3.5)


# -- acceptance reporting: one PASS/FAIL line per criterion ----------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion this test checks")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    info = getattr(report, "criterion", None)
    if info is None:
        return
    num, title = info
    prev = _CRITERIA.get(num, (title, True))
    _CRITERIA[num] = (title, prev[1] and report.passed)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result().criterion = tuple(marker.args)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, ok = _CRITERIA[num]
        terminalreporter.write_line(f"AC{num:<3} {'PASS' if ok else 'FAIL'}  {title}")
