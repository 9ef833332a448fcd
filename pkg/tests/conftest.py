import math

import numpy as np
import pytest

from ccbell.correlations import CorrelationBox
from ccbell.problems import rac21
from ccbell.quantum import box_from_protocol, phi_plus, rac_quantum_protocol

COS2 = math.cos(math.pi / 8) ** 2


@pytest.fixture
def rac():
    return rac21()


@pytest.fixture
def rac_box(rac):
    return box_from_protocol(rac_quantum_protocol(), phi_plus(2), rac)


def agreement_box(problem, accept, agree):
    """Box with p(a=1|x,y) = accept[x,y] and p(b ok | a=1) = agree[x,y]; Bob is uniform when a=0.

    Only defined for function problems.
    """
    nx, ny = problem.shape
    accept = np.broadcast_to(np.asarray(accept, dtype=float), (nx, ny))
    agree = np.broadcast_to(np.asarray(agree, dtype=float), (nx, ny))
    p = np.zeros((nx, ny, 2, 2))
    for i in range(nx):
        for j in range(ny):
            f = int(problem.valid[i, j, 1])
            p[i, j, 1, f] = accept[i, j] * agree[i, j]
            p[i, j, 1, 1 - f] = accept[i, j] * (1 - agree[i, j])
            p[i, j, 0, :] = (1 - accept[i, j]) / 2
    return CorrelationBox(problem.x_labels, problem.y_labels, p)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
