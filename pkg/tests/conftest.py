"""Shared pytest hooks: per-criterion pass/fail lines for the acceptance suite."""

_acceptance_results: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        outcome = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        _acceptance_results.append((name, outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in _acceptance_results:
        terminalreporter.write_line(f"{name}: {outcome}")
