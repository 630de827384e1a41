import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from teachsize.config import DEFAULT_CONFIG  # noqa: E402
from teachsize.protocol import build_book  # noqa: E402

_CRITERIA: dict[int, dict] = {}


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
    entry = _CRITERIA.setdefault(num, {"title": title, "ok": True, "ran": False, "notes": []})
    if rep.when == "call":
        entry["ran"] = True
        entry["notes"] += [v for k, v in item.user_properties if k == "metric"]
    if rep.failed:
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        e = _CRITERIA[num]
        status = "PASS" if e["ok"] and e["ran"] else "FAIL"
        line = f"[{status}] criterion {num:2d}: {e['title']}"
        if e["notes"]:
            line += "  (" + "; ".join(e["notes"]) + ")"
        tr.write_line(line)


@pytest.fixture
def metric(record_property):
    def note(text: str) -> None:
        record_property("metric", text)
    return note


@pytest.fixture(scope="session")
def config():
    return DEFAULT_CONFIG


@pytest.fixture(scope="session")
def book(config):
    return build_book(config)


@pytest.fixture(scope="session")
def small_book(config):
    return build_book(config, max_witness_bits=20)
