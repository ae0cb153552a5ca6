import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE_LINES: list[tuple[str, bool, str]] = []
_PROPERTY_OUTCOMES: dict[str, bool] = {}


@pytest.fixture
def acceptance():
    """Record one criterion verdict; printed in the terminal summary."""

    def record(label: str, passed: bool, detail: str) -> bool:
        ACCEPTANCE_LINES.append((label, bool(passed), detail))
        print(f"{'PASS' if passed else 'FAIL'} {label}: {detail}")
        return bool(passed)

    return record


def pytest_runtest_logreport(report):
    if "test_acceptance" in report.nodeid:
        return
    if report.when == "call" or report.outcome == "failed":
        ok = report.outcome != "failed"
        _PROPERTY_OUTCOMES[report.nodeid] = _PROPERTY_OUTCOMES.get(report.nodeid, True) and ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES and not _PROPERTY_OUTCOMES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for label, passed, detail in sorted(ACCEPTANCE_LINES):
        tr.write_line(f"{'PASS' if passed else 'FAIL'} {label}: {detail}")
    if _PROPERTY_OUTCOMES:
        failed = sorted(k for k, ok in _PROPERTY_OUTCOMES.items() if not ok)
        total = len(_PROPERTY_OUTCOMES)
        verdict = "PASS" if not failed else "FAIL"
        tr.write_line(f"{verdict} criterion 09b property suite: {total - len(failed)}/{total} "
                      f"module tests passed" + (f"; failing: {', '.join(failed)}" if failed else ""))
    else:
        tr.write_line("---- criterion 09b property suite: not run in this session")
