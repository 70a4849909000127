import math
from fractions import Fraction

import pytest

from dioflow.core import TargetVector, quadratic_surd

# (a, b, c) for (sqrt(a) + b) / c, all in (0, 1)
QUADRATIC = {
    "golden": (5, -1, 2),
    "sqrt2": (2, -1, 1),
    "sqrt3": (3, -1, 1),
    "sqrt7": (7, -2, 1),
    "sqrt13": (13, -3, 1),
    "sqrt6": (6, -2, 1),
    "sqrt10": (10, -3, 1),
    "sqrt11": (11, -3, 1),
    "sqrt17": (17, -3, 2),
    "sqrt19": (19, -4, 1),
}


def surd_target(name: str, bits: int = 512) -> TargetVector:
    a, b, c = QUADRATIC[name]
    return TargetVector((quadratic_surd(a, b, c, bits),), bits)


def liouville_value(k_max: int = 6) -> Fraction:
    return sum(Fraction(1, 2 ** math.factorial(k)) for k in range(1, k_max + 1))


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def acceptance_lines():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
