import numpy as np
import pytest

from nehari_critical import nehari
from nehari_critical.discretization import make_grid
from nehari_critical.functional import ProblemSpec

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def grid():
    return make_grid(1.0, 1024)


@pytest.fixture(scope="session")
def small_grid():
    return make_grid(1.0, 256)


@pytest.fixture(scope="session")
def single_spec(grid):
    return ProblemSpec(grid, [-7.0], [[1.0]], (0, 1))


@pytest.fixture(scope="session")
def single_min(single_spec):
    return nehari.minimize(single_spec, options=nehari.SolverOptions(restarts=4))


@pytest.fixture(scope="session")
def competitive_spec(grid):
    return ProblemSpec(grid, [-7.0, -7.0], [[1.0, -1.0], [-1.0, 1.0]], (0, 1, 2))


@pytest.fixture(scope="session")
def competitive_subs(competitive_spec):
    opts = nehari.SolverOptions(restarts=2)
    return {(h,): nehari.minimize(competitive_spec, (h,), opts) for h in (0, 1)}


@pytest.fixture(scope="session")
def cooperative_spec(grid):
    return ProblemSpec(grid, [-7.0, -7.0], [[1.0, 2.0], [2.0, 1.0]], (0, 2))


def random_state(rng, grid, d, support=0.9):
    """Nonnegative random humps vanishing at the boundary."""
    r = grid.nodes
    out = np.zeros((d, grid.n))
    for i in range(d):
        c = rng.uniform(0.0, 0.5)
        w = rng.uniform(0.1, 0.4)
        out[i] = rng.uniform(0.5, 3.0) * np.exp(-((r - c) / w) ** 2) * np.clip(support - r, 0, None)
    out[:, -1] = 0.0
    return out


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
