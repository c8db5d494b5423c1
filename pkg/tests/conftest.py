import numpy as np
import pytest

from cdfir import LinkParams


@pytest.fixture
def link():
    """20 GBaud, 1000 km, S=2, 16 ps/(nm km) at 1550 nm."""
    return LinkParams.from_engineering(length_km=1000, symbol_rate_gbaud=20)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def rms(x):
    return float(np.sqrt(np.mean(np.abs(np.asarray(x)) ** 2)))


_criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call":
        return
    number, title = marker.args
    detail = dict(item.user_properties).get("detail", "")
    if rep.failed and not detail:
        detail = str(call.excinfo.value).splitlines()[0] if call.excinfo else ""
    _criteria[number] = (title, "PASS" if rep.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, status, detail = _criteria[number]
        terminalreporter.write_line(f"criterion {number:>2} {status}  {title}: {detail}")
