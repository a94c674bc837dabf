from __future__ import annotations

from fractions import Fraction

import pytest

# filled by tests/test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def matmul(a, b):
    """Plain nested-list product; the oracle the matrix class is checked against."""
    n, m, p = len(a), len(b), len(b[0])
    return [[sum(Fraction(a[r][t]) * b[t][c] for t in range(m)) for c in range(p)] for r in range(n)]


def lyness(a, b, steps):
    """``y_{n+1} = (1 + y_n) / y_{n-1}``, iterated directly."""
    ys = [Fraction(a), Fraction(b)]
    while len(ys) < steps:
        ys.append((1 + ys[-1]) / ys[-2])
    return ys


@pytest.fixture
def lyness_oracle():
    return lyness
