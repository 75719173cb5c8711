import math
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from nhquartic import BasisConfig, ModelParams, Problem  # noqa: E402

SQRT2 = math.sqrt(2.0)
KINDS = ("xy", "x2y", "xy2", "x2y+xy2")
STUDIED_KINDS = ("xy", "x2y", "x2y+xy2")


_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (report.when != "call" and report.passed):
        return
    number, title = mark.args
    ok = report.passed and not report.skipped
    # a failure in any phase marks the criterion failed
    _CRITERIA[number] = (title, ok and _CRITERIA.get(number, (title, True))[1])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}")


@pytest.fixture(scope="session")
def problems():
    """Small oscillator-basis problems, cached per (size, kind, alpha_y)."""
    cache = {}

    def get(size, kind, alpha_y=SQRT2):
        key = (size, kind, alpha_y)
        if key not in cache:
            cache[key] = Problem.build(ModelParams(1.0, alpha_y, kind), BasisConfig(size))
        return cache[key]

    return get

# absolute tolerance for converged ground-state energies of H0
GROUND_TOL = 1e-10
