"""Prints one PASS/FAIL line per acceptance criterion at the end of the run."""

import re

_results = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\w+)", report.nodeid)
    if not m:
        return
    key = m.group(1)
    if report.when == "call" or report.outcome != "passed":
        if hasattr(report, "wasxfail"):
            outcome = "FAIL (expected, see ledger)"
        elif report.outcome == "passed":
            outcome = "PASS"
        else:
            outcome = "FAIL"
        if key not in _results or outcome != "PASS":
            _results[key] = outcome


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_results, key=lambda k: (int(re.match(r"\d+", k).group()), k)):
        terminalreporter.write_line(f"criterion {key.replace('_', ' ')}: {_results[key]}")
