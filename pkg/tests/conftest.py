import re

import pytest

_AC_RE = re.compile(r"test_acceptance\.py::test_ac(\d+)_")
_results: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running check")


def pytest_runtest_logreport(report):
    m = _AC_RE.search(report.nodeid)
    if not m:
        return
    ac = int(m.group(1))
    failed = report.failed or (report.when == "call" and report.outcome != "passed")
    if report.when == "call" or failed:
        prev = _results.get(ac, True)
        _results[ac] = prev and not failed


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for ac in sorted(_results):
        terminalreporter.write_line(f"AC{ac}: {'PASS' if _results[ac] else 'FAIL'}")


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240601)
