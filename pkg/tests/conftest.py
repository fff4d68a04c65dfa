ACCEPTANCE_RESULTS = {}


def pytest_runtest_logreport(report):
    marker = "test_acceptance.py::test_criterion_"
    if marker not in report.nodeid or (report.when != "call" and report.outcome == "passed"):
        return
    number = int(report.nodeid.split(marker)[1].split("_")[0])
    # a criterion with several parametrized cases fails if any case fails
    if ACCEPTANCE_RESULTS.get(number) != "failed":
        ACCEPTANCE_RESULTS[number] = "passed" if report.outcome == "passed" else "failed"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    from test_acceptance import CRITERIA

    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        verdict = "PASS" if ACCEPTANCE_RESULTS[number] == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {verdict}  {CRITERIA[number]}")
