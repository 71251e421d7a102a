from __future__ import annotations

import re

_CRITERION = re.compile(r"test_criterion_(\d+)_(\w+)")
_results: dict[int, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    num = int(m.group(1))
    title = m.group(2).replace("_", " ")
    if report.when == "call" or report.outcome != "passed":
        title, prev = _results.get(num, (title, "PASS"))
        outcome = "PASS" if report.outcome == "passed" and prev == "PASS" else "FAIL"
        _results[num] = (title, outcome)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_results):
        title, outcome = _results[num]
        terminalreporter.write_line(f"criterion {num:2d}: {outcome}  {title}")
