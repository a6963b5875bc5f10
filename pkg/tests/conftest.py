import math

import numpy as np
import pytest


def within_sigma(estimate, target, sigma, n_sigma=3.0):
    """True when ``|estimate - target| <= n_sigma * sigma``."""
    return abs(estimate - target) <= n_sigma * sigma


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def sqrt():
    return math.sqrt


ACCEPTANCE_LINES = []


def record_criterion(number, ok, detail):
    """Remember an acceptance verdict; all lines are printed at the end of the run."""
    line = f"AC{number} {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
