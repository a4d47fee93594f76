import re

_results = []


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    m = re.search(r"criterion_(\d+)", report.nodeid)
    if m:
        _results.append((int(m.group(1)), report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for num, name, outcome in sorted(_results):
        word = "PASS" if outcome == "passed" else outcome.upper()
        terminalreporter.write_line(f"  criterion {num:2d}: {word}  ({name})")
