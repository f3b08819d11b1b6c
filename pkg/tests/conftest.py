from __future__ import annotations

from pathlib import Path

import pytest

from mvmob.workspace import load_project

ROOT = Path(__file__).resolve().parent.parent
CITYGUIDE = ROOT / "samples" / "cityguide"
GOLDEN = Path(__file__).resolve().parent / "golden" / "cityguide"
SCENARIO = CITYGUIDE / "browse-and-detail.scn"

_acceptance: dict[str, str] = {}


@pytest.fixture(scope="session")
def cityguide():
    loaded = load_project(CITYGUIDE)
    assert loaded.ok, [d.human() for d in loaded.diagnostics]
    return loaded.project


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion checked by this test")


def pytest_runtest_logreport(report):
    criterion = dict(report.user_properties).get("criterion")
    if criterion is None:
        return
    if report.when == "call" or report.outcome != "passed":
        prev = _acceptance.get(criterion, "PASS")
        _acceptance[criterion] = "PASS" if prev == "PASS" and report.outcome == "passed" else "FAIL"


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            item.user_properties.append(("criterion", mark.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, verdict in _acceptance.items():
        terminalreporter.write_line(f"{verdict}  {name}")
