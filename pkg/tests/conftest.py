"""Collects the acceptance-suite outcomes and prints one line per criterion at the end of the run."""

import re

_results: dict[int, list[tuple[str, str]]] = {}
_titles: dict[int, str] = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and (report.skipped or report.failed)):
        props = dict(report.user_properties)
        n = int(m.group(1))
        _titles.setdefault(n, props.get("title", ""))
        outcome = "SKIP" if report.skipped else ("PASS" if report.passed else "FAIL")
        detail = props.get("detail", "")
        if report.skipped and isinstance(report.longrepr, tuple):
            detail = report.longrepr[2].removeprefix("Skipped: ")
        _results.setdefault(n, []).append((outcome, detail))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        outcomes = [o for o, _ in _results[n]]
        verdict = "FAIL" if "FAIL" in outcomes else ("SKIP" if all(o == "SKIP" for o in outcomes) else "PASS")
        details = "; ".join(d for _, d in _results[n] if d)
        line = f"criterion {n}: {verdict}  {_titles.get(n, '')}"
        terminalreporter.write_line(line + (f"  [{details}]" if details else ""))
