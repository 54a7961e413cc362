import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.fixture
def detail(request):
    """Append a measured value to this criterion's summary line."""
    notes = request.node.stash.setdefault(_NOTES, [])
    return notes.append


_NOTES = pytest.StashKey[list]()


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not rep.failed:
        return
    number, title = mark.args
    entry = _criteria.setdefault(number, {"title": title, "passed": True, "notes": []})
    entry["passed"] &= rep.passed
    if rep.when == "call":
        entry["notes"] = item.stash.get(_NOTES, [])
        if rep.failed:
            msg = str(rep.longrepr.reprcrash.message) if hasattr(rep.longrepr, "reprcrash") else "failed"
            entry["notes"] = entry["notes"] + [msg.splitlines()[0]]


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_criteria):
        c = _criteria[number]
        status = "PASS" if c["passed"] else "FAIL"
        tr.write_line(f"{status} criterion {number}: {c['title']}")
        for note in c["notes"]:
            tr.write_line(f"    {note}")
