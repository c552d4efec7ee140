import numpy as np
import pytest

ACCEPTANCE = "test_acceptance.py"
_results = {}


def pytest_runtest_logreport(report):
    if ACCEPTANCE not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _results[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, outcome in _results.items():
        name = nodeid.split("::")[-1]
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{mark}  {name}")
    passed = sum(o == "passed" for o in _results.values())
    terminalreporter.write_line(f"{passed}/{len(_results)} criteria passed")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
