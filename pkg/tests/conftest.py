import numpy as np
import pytest

from adr_split import reference
from adr_split.problem import rotating_flow_problem
from adr_split.stepper import Discretization, SchemeParams, SplitSolver


@pytest.fixture(scope="session")
def rotating_problem():
    return rotating_flow_problem()


@pytest.fixture(scope="session")
def benchmark_run(rotating_problem):
    """Split-solver run of the shipped benchmark at default discretization."""
    with SplitSolver(rotating_problem, Discretization(), workers=1) as solver:
        grid, report = solver.run(SchemeParams(theta=0.5, dt=0.001, steps=50))
    return grid, report


@pytest.fixture(scope="session")
def reference_grid_450(rotating_problem):
    """Stationary oracle on the 450-element triangulation (15 x 15 cells)."""
    mesh = reference.build_tri_mesh(rotating_problem.domain, 15, 15)
    return reference.solve_stationary_2d(rotating_problem, mesh)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
