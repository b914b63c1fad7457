"""Problem definition shared by the split solver and the 2D verification solver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expr import Expression, parse
from .field import DomainRect, VectorFieldSpec


@dataclass(frozen=True)
class ProblemConfig:
    """Dirichlet problem -mu*Lap(u) + beta.grad(u) + sigma*u = f, u = 0 on the boundary.

    All coefficients are expressions in x and y; u0 (optional) is the initial
    state for transient runs, otherwise a per-curve stationary bootstrap is
    used.
    """

    domain: DomainRect
    mu: Expression
    sigma: Expression
    beta1: Expression
    beta2: Expression
    f: Expression
    u0: Expression | None = None
    eps_field: float = 1e-12

    @property
    def field(self):
        return VectorFieldSpec(self.beta1, self.beta2, self.eps_field)

    def beta_norm(self, x, y):
        return np.hypot(self.beta1(x, y), self.beta2(x, y))

    def constant_coefficient_notes(self):
        """Warnings for coefficient choices outside the method's core assumptions."""
        notes = []
        if not self.mu.is_constant():
            notes.append("mu is not constant; the splitting is derived for constant diffusion")
        if not self.sigma.is_constant():
            notes.append("sigma is not constant; the splitting is derived for constant reaction")
        return notes


def problem_from_strings(
    domain=(0.0, 1.0, 0.0, 1.0),
    mu="1",
    sigma="1",
    beta1="1",
    beta2="0",
    f="0",
    u0=None,
    eps_field=1e-12,
):
    """Convenience constructor used by tests and the config loader."""
    return ProblemConfig(
        domain=DomainRect(*domain),
        mu=parse(mu),
        sigma=parse(sigma),
        beta1=parse(beta1),
        beta2=parse(beta2),
        f=parse(f),
        u0=parse(u0) if u0 is not None else None,
        eps_field=eps_field,
    )


def rotating_flow_problem():
    """The shipped rotating-flow benchmark problem on the unit square."""
    return problem_from_strings(
        domain=(0.0, 1.0, 0.0, 1.0),
        mu="1",
        sigma="1",
        beta1="-5*(y+1)",
        beta2="5*(x+1)",
        f="5",
    )
