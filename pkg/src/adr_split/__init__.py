"""Directional diffusion splitting solver for 2D advection-diffusion-reaction
boundary value problems.

The stationary or transient problem is reduced to two families of 1D
finite-element problems along integral curves of the advection field and its
orthogonal rotation, coupled per time step through a structured-grid
interpolation layer.  An independent unsplit 2D solver serves as the
verification oracle.
"""

from .errors import AdrSplitError
from .field import DomainRect, VectorFieldSpec
from .kernels import BACKEND as KERNEL_BACKEND
from .problem import ProblemConfig, problem_from_strings, rotating_flow_problem
from .stepper import Discretization, SchemeParams, SplitSolver, run

__version__ = "0.1.0"

__all__ = [
    "AdrSplitError",
    "DomainRect",
    "VectorFieldSpec",
    "KERNEL_BACKEND",
    "ProblemConfig",
    "problem_from_strings",
    "rotating_flow_problem",
    "Discretization",
    "SchemeParams",
    "SplitSolver",
    "run",
    "__version__",
]
