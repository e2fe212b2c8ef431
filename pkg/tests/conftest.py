import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    detail = dict(item.user_properties).get("detail", "")
    if report.when == "call" or (report.when == "setup" and report.skipped):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        if report.skipped and not detail:
            detail = report.longrepr[2] if isinstance(report.longrepr, tuple) else ""
        _CRITERIA.setdefault((number, title), []).append((status, detail))
    elif report.failed:
        _CRITERIA.setdefault((number, title), []).append(("FAIL", f"{report.when} error"))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), results in sorted(_CRITERIA.items()):
        statuses = {s for s, _ in results}
        status = "FAIL" if "FAIL" in statuses else "PASS" if "PASS" in statuses else "SKIP"
        details = "; ".join(d for _, d in results if d)
        line = f"[{status}] {number:>2}. {title}"
        terminalreporter.write_line(f"{line}  ({details})" if details else line)
