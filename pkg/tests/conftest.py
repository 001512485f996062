import numpy as np
import pytest

from blockprox.core import ProblemSpec
from blockprox.linops import BlockOperatorGrid, MatrixOperator
from blockprox.prox import prox_scaled_l2_norm, prox_zero, prox_zero_indicator


def scalar_problem(f, g, L=1.0) -> ProblemSpec:
    """m = p = 1, H = G = R."""
    grid = BlockOperatorGrid([1], [1])
    grid.set(0, 0, MatrixOperator(np.array([[float(L)]])))
    return ProblemSpec([f], [g], grid)


@pytest.fixture
def toy_problem():
    """f = indicator of {0}, g = |.|, L = 1: the unique KT point is (0, v*) with |v*| <= 1."""
    return scalar_problem(prox_zero_indicator(1), prox_scaled_l2_norm(1.0, 1))


@pytest.fixture
def zero_problem():
    grid = BlockOperatorGrid([2, 3], [2])
    rng = np.random.default_rng(0)
    grid.set(0, 0, MatrixOperator(rng.standard_normal((2, 2))))
    grid.set(0, 1, MatrixOperator(rng.standard_normal((2, 3))))
    return ProblemSpec([prox_zero(2), prox_zero(3)], [prox_zero(2)], grid)


@pytest.fixture(scope="session")
def desk_exp1():
    from blockprox.experiments import load_experiment

    return load_experiment("exp1")


@pytest.fixture(scope="session")
def desk_exp1_reference(desk_exp1):
    return desk_exp1.reference()


@pytest.fixture(scope="session")
def desk_exp2():
    from blockprox.experiments import load_experiment

    return load_experiment("exp2")


@pytest.fixture(scope="session")
def desk_exp2_reference(desk_exp2):
    return desk_exp2.reference()


ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str, seconds: float) -> None:
    """Store (and print) the one-line verdict of an acceptance criterion."""
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}  [{seconds:.1f} s]"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
