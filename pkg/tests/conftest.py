from __future__ import annotations

import numpy as np
import pytest

from grassflow.algebra import AlgebraSpec, Family
from grassflow.fields import Grid

TWO_PI = 2.0 * np.pi


@pytest.fixture
def u2() -> AlgebraSpec:
    return AlgebraSpec(Family.COMPACT_UNITARY, 2, 1)


@pytest.fixture
def u31() -> AlgebraSpec:
    return AlgebraSpec(Family.NONCOMPACT_UNITARY, 3, 1)


@pytest.fixture
def para2() -> AlgebraSpec:
    return AlgebraSpec(Family.PARA_REAL, 2, 1)


@pytest.fixture
def grid64() -> Grid:
    return Grid(64, TWO_PI)


@pytest.fixture
def grid128() -> Grid:
    return Grid(128, TWO_PI)


def all_specs() -> list[AlgebraSpec]:
    return [
        AlgebraSpec(Family.COMPACT_UNITARY, 2, 1),
        AlgebraSpec(Family.NONCOMPACT_UNITARY, 3, 1),
        AlgebraSpec(Family.PARA_REAL, 2, 1),
    ]


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
