import numpy as np
import pytest

from domino.channel_model import default_channel, default_layout


@pytest.fixture(scope="session")
def layout():
    return default_layout()


@pytest.fixture(scope="session")
def channel():
    return default_channel()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ---- acceptance reporting -------------------------------------------------

import time

SUITE_LIMIT_S = 120.0
_results = {}
_state = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


def pytest_sessionstart(session):
    _state["start"] = time.perf_counter()


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    number, title = mark.args
    detail = dict(item.user_properties).get("detail", "")
    _results[number] = (title, rep.passed, detail)


def pytest_collection_finish(session):
    names = {item.path.name for item in session.items}
    # the wall-clock criterion only makes sense when the whole suite runs
    _state["full_suite"] = "test_acceptance.py" in names and len(names) > 5


def pytest_sessionfinish(session, exitstatus):
    if _state.get("full_suite"):
        elapsed = time.perf_counter() - _state["start"]
        ok = elapsed < SUITE_LIMIT_S
        _results[8] = ("full suite wall clock", ok, f"{elapsed:.1f} s (limit {SUITE_LIMIT_S:.0f} s)")
        if not ok and session.exitstatus == 0:
            session.exitstatus = 1


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        title, ok, detail = _results[number]
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number}: {title}"
        terminalreporter.write_line(f"{line}  [{detail}]" if detail else line)
