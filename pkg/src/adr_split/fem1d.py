"""1D finite elements on a single integral curve.

Linear (P1) elements on a uniform arc-length mesh, consistent mass matrix,
2-point Gaussian quadrature.  Two bilinear forms are assembled:

* the s-form (diffusion along the flow + advection + reaction), used on
  advection-family curves together with the source load;
* the m-form (cross-flow diffusion only), used on the rotated family with a
  zero load.

Both curve endpoints sit on the domain boundary and carry homogeneous
Dirichlet values, imposed by eliminating the first and last rows/columns.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import kernels
from .errors import SingularSystemError

# 2-point Gauss abscissas on [0, 1] (exact for cubics)
_GAUSS_XI = (0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0))


@dataclass
class Mesh1D:
    """Uniform mesh over [0, |L|] with the mapping back to 2D curve points."""

    coords: np.ndarray  # (N+1,) strictly increasing, coords[0] = 0
    points: np.ndarray  # (N+1, 2) 2D locations of the mesh nodes on the curve
    curve: object = None

    @property
    def n_elements(self):
        return self.coords.shape[0] - 1

    def map_to_curve(self, arc):
        """2D points of arbitrary arc-length positions (piecewise-linear)."""
        if self.curve is not None:
            x = np.interp(arc, self.curve.arclen, self.curve.nodes[:, 0])
            y = np.interp(arc, self.curve.arclen, self.curve.nodes[:, 1])
        else:
            x = np.interp(arc, self.coords, self.points[:, 0])
            y = np.interp(arc, self.coords, self.points[:, 1])
        return x, y


def build_mesh(curve, h_fem, min_elements=4):
    """Uniform arc-length mesh with element size ~ h_fem (at least 4 elements)."""
    n_el = max(min_elements, int(round(curve.length / h_fem)))
    coords = np.linspace(0.0, curve.length, n_el + 1)
    x, y = (np.interp(coords, curve.arclen, curve.nodes[:, 0]),
            np.interp(coords, curve.arclen, curve.nodes[:, 1]))
    return Mesh1D(coords=coords, points=np.column_stack((x, y)), curve=curve)


@dataclass
class Bands:
    """Tridiagonal matrix as (lower, diag, upper) bands."""

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray

    def matvec(self, x):
        y = self.diag * x
        y[:-1] += self.upper * x[1:]
        y[1:] += self.lower * x[:-1]
        return y

    def row_sums(self):
        s = self.diag.copy()
        s[:-1] += self.upper
        s[1:] += self.lower
        return s

    def __add__(self, other):
        return Bands(self.lower + other.lower, self.diag + other.diag,
                     self.upper + other.upper)

    def scaled(self, factor):
        return Bands(factor * self.lower, factor * self.diag, factor * self.upper)


@dataclass
class Tridiagonal1DSystem:
    """Mass and form matrices plus load for one curve.

    ``mass``/``form``/``load`` cover all mesh nodes (before boundary
    elimination); the ``*_interior`` views are the eliminated system that the
    solvers work with.
    """

    kind: str  # "s" | "m"
    mesh: Mesh1D | None
    mass: Bands
    form: Bands
    load: np.ndarray

    @property
    def n_interior(self):
        return self.load.shape[0] - 2

    @property
    def mass_interior(self):
        return Bands(self.mass.lower[1:-1], self.mass.diag[1:-1], self.mass.upper[1:-1])

    @property
    def form_interior(self):
        return Bands(self.form.lower[1:-1], self.form.diag[1:-1], self.form.upper[1:-1])

    @property
    def load_interior(self):
        return self.load[1:-1]

    @classmethod
    def from_interior(cls, mass, form, load, kind="s"):
        """Build a system directly from interior data (testing convenience)."""
        def pad_bands(b):
            return Bands(np.concatenate(([0.0], b.lower, [0.0])),
                         np.concatenate(([0.0], b.diag, [0.0])),
                         np.concatenate(([0.0], b.upper, [0.0])))

        return cls(kind=kind, mesh=None, mass=pad_bands(mass), form=pad_bands(form),
                   load=np.concatenate(([0.0], load, [0.0])))


@dataclass
class CurveSolution:
    """Nodal values on a 1D mesh; first and last values are pinned to 0."""

    values: np.ndarray
    mesh: Mesh1D | None = None

    def copy(self):
        return CurveSolution(self.values.copy(), self.mesh)


def _zero_bands(n_nodes):
    return Bands(np.zeros(n_nodes - 1), np.zeros(n_nodes), np.zeros(n_nodes - 1))


def assemble(curve, mesh, problem, kind):
    """Assemble mass, form matrix, and load for one curve.

    Coefficients are evaluated at the 2D image of each quadrature abscissa.
    kind "s": mu*u'v' + |beta|*u'v + sigma*u*v with load integral of f*v;
    kind "m": mu*u'v' with zero load.
    """
    if kind not in ("s", "m"):
        raise ValueError("kind must be 's' or 'm'")
    coords = mesh.coords
    n_el = mesh.n_elements
    h = np.diff(coords)

    # quadrature abscissas in arc length, then their 2D images
    q = np.empty((n_el, 2))
    q[:, 0] = coords[:-1] + _GAUSS_XI[0] * h
    q[:, 1] = coords[:-1] + _GAUSS_XI[1] * h
    qx, qy = mesh.map_to_curve(q.ravel())
    mu = np.asarray(problem.mu(qx, qy)).reshape(n_el, 2)
    w = 0.5 * h  # both Gauss weights equal h/2

    phi = np.array([[1.0 - _GAUSS_XI[0], 1.0 - _GAUSS_XI[1]],
                    [_GAUSS_XI[0], _GAUSS_XI[1]]])  # phi[i, q]

    # element matrices K[e, i, j]
    K = np.zeros((n_el, 2, 2))
    grad_sign = np.array([-1.0, 1.0])
    mu_w = (mu * w[:, None]).sum(axis=1)  # integral of mu over each element
    for i in range(2):
        for j in range(2):
            K[:, i, j] += mu_w * grad_sign[i] * grad_sign[j] / h ** 2

    load = np.zeros(n_el + 1)
    if kind == "s":
        bn = np.asarray(problem.beta_norm(qx, qy)).reshape(n_el, 2)
        sig = np.asarray(problem.sigma(qx, qy)).reshape(n_el, 2)
        fv = np.asarray(problem.f(qx, qy)).reshape(n_el, 2)
        for i in range(2):
            for j in range(2):
                adv = (w[:, None] * bn * phi[i]).sum(axis=1) * grad_sign[j] / h
                rea = (w[:, None] * sig * phi[i] * phi[j]).sum(axis=1)
                K[:, i, j] += adv + rea
        load[:-1] += (w[:, None] * fv * phi[0]).sum(axis=1)
        load[1:] += (w[:, None] * fv * phi[1]).sum(axis=1)

    form = _zero_bands(n_el + 1)
    form.diag[:-1] += K[:, 0, 0]
    form.diag[1:] += K[:, 1, 1]
    form.upper[:] += K[:, 0, 1]
    form.lower[:] += K[:, 1, 0]

    mass = _zero_bands(n_el + 1)
    mass.diag[:-1] += h / 3.0
    mass.diag[1:] += h / 3.0
    mass.upper[:] += h / 6.0
    mass.lower[:] += h / 6.0

    return Tridiagonal1DSystem(kind=kind, mesh=mesh, mass=mass, form=form, load=load)


def solve_tridiagonal(lower, diag, upper, rhs):
    """Direct tridiagonal solve; raises SingularSystemError on a zero pivot."""
    lower = np.ascontiguousarray(lower, dtype=np.float64)
    diag = np.ascontiguousarray(diag, dtype=np.float64)
    upper = np.ascontiguousarray(upper, dtype=np.float64)
    rhs = np.ascontiguousarray(rhs, dtype=np.float64)
    out = np.empty_like(rhs)
    bad = kernels.thomas(lower, diag, upper, rhs, out)
    if bad >= 0:
        raise SingularSystemError(f"zero pivot at row {bad} during tridiagonal elimination")
    return out


def theta_step(sys, u_j, theta, dt):
    """One step of the one-step recurrence:

    (M + theta*dt*A) du = load - A u_j,   u_{j+1} = u_j + dt*du.

    theta = 0 degenerates to explicit Euler (M du = load - A u_j).
    """
    u = u_j.values
    ui = u[1:-1]
    A = sys.form_interior
    rhs = sys.load_interior - A.matvec(ui)
    lhs = sys.mass_interior + A.scaled(theta * dt)
    du = solve_tridiagonal(lhs.lower, lhs.diag, lhs.upper, rhs)
    out = u.copy()
    out[1:-1] = ui + dt * du
    return CurveSolution(out, u_j.mesh if u_j.mesh is not None else sys.mesh)


def stationary_solve(sys):
    """Direct solve of the (eliminated) form system: A u = load."""
    A = sys.form_interior
    ui = solve_tridiagonal(A.lower, A.diag, A.upper, sys.load_interior)
    out = np.zeros(sys.load.shape[0])
    out[1:-1] = ui
    return CurveSolution(out, sys.mesh)
