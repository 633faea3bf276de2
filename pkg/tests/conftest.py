import numpy as np
import pytest

from annealbench.ising import IsingModel, QuboModel


def random_ising(rng, n, density=0.6, scale=1.0):
    h = {i: float(rng.normal(0, scale)) for i in range(n) if rng.random() < 0.8}
    J = {(i, j): float(rng.normal(0, scale)) for i in range(n) for j in range(i + 1, n)
         if rng.random() < density}
    return IsingModel(n, h, J, float(rng.normal()))


def random_qubo(rng, n, density=0.6):
    lin = {i: float(rng.integers(-5, 6)) for i in range(n)}
    quad = {(i, j): float(rng.integers(-5, 6)) for i in range(n) for j in range(i + 1, n)
            if rng.random() < density}
    return QuboModel(n, lin, quad, float(rng.integers(-3, 4)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
