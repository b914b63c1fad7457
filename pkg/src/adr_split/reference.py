"""Independent unsplit 2D solver used as the verification oracle.

P1 elements on a structured triangulation of the rectangle (each cell cut
along the bottom-left to top-right diagonal), 3-point quadrature, the full
bilinear form mu*grad(u).grad(v) + (beta.grad(u)) v + sigma*u*v, direct
sparse solves.  Deliberately shares no numerics with the split solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SingularSystemError
from .transfer import SolutionGrid

# degree-2 exact quadrature: barycentric (2/3, 1/6, 1/6) cyclic, equal weights
_QPOINTS = np.array([
    [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
    [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
    [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
])


@dataclass
class StructuredTriMesh:
    """(nx+1) x (ny+1) nodes, 2*nx*ny positively oriented triangles."""

    domain: object  # DomainRect
    nx: int
    ny: int

    def __post_init__(self):
        dom = self.domain
        xs = np.linspace(dom.x_min, dom.x_max, self.nx + 1)
        ys = np.linspace(dom.y_min, dom.y_max, self.ny + 1)
        X, Y = np.meshgrid(xs, ys)
        self.nodes = np.column_stack((X.ravel(), Y.ravel()))
        ids = np.arange((self.nx + 1) * (self.ny + 1)).reshape(self.ny + 1, self.nx + 1)
        lower = np.stack((ids[:-1, :-1], ids[:-1, 1:], ids[1:, 1:]), axis=-1)
        upper = np.stack((ids[:-1, :-1], ids[1:, 1:], ids[1:, :-1]), axis=-1)
        self.triangles = np.concatenate((lower.reshape(-1, 3), upper.reshape(-1, 3)))
        boundary = np.zeros_like(ids, dtype=bool)
        boundary[0, :] = boundary[-1, :] = True
        boundary[:, 0] = boundary[:, -1] = True
        self.boundary_mask = boundary.ravel()

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def n_elements(self):
        return self.triangles.shape[0]

    def node_grid_values(self, flat):
        return flat.reshape(self.ny + 1, self.nx + 1)


def build_tri_mesh(domain, nx=15, ny=15):
    return StructuredTriMesh(domain, nx, ny)


@dataclass
class Sparse2DSystem:
    mesh: StructuredTriMesh
    mass: sp.csr_matrix  # interior x interior
    form: sp.csr_matrix
    load: np.ndarray
    interior: np.ndarray  # interior node ids

    def __post_init__(self):
        self._factor_cache = {}

    def factor(self, theta, dt):
        key = (float(theta), float(dt))
        if key not in self._factor_cache:
            lhs = (self.mass + theta * dt * self.form).tocsc()
            self._factor_cache[key] = spla.splu(lhs)
        return self._factor_cache[key]


def _triangle_geometry(mesh):
    v = mesh.nodes[mesh.triangles]  # (ntri, 3, 2)
    x = v[:, :, 0]
    y = v[:, :, 1]
    # gradients of barycentric coordinates: grad(l_i) = (b_i, c_i)/(2A)
    bcoef = np.stack((y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]), axis=1)
    ccoef = np.stack((x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]), axis=1)
    area2 = x[:, 0] * bcoef[:, 0] + x[:, 1] * bcoef[:, 1] + x[:, 2] * bcoef[:, 2]
    area = 0.5 * area2
    if np.any(area <= 0):
        raise ValueError("triangulation contains non-positively oriented elements")
    grads = np.stack((bcoef, ccoef), axis=-1) / area2[:, None, None]  # (ntri, 3, 2)
    return v, area, grads


def assemble_2d(problem, mesh):
    """Mass and full-form matrices plus load, boundary rows/columns eliminated."""
    v, area, grads = _triangle_geometry(mesh)
    ntri = mesh.n_elements
    qx = np.einsum("qk,tk->tq", _QPOINTS, v[:, :, 0])  # (ntri, 3 qpoints)
    qy = np.einsum("qk,tk->tq", _QPOINTS, v[:, :, 1])
    w = area[:, None] / 3.0

    mu = np.asarray(problem.mu(qx, qy))
    sigma = np.asarray(problem.sigma(qx, qy))
    b1 = np.asarray(problem.beta1(qx, qy))
    b2 = np.asarray(problem.beta2(qx, qy))
    fv = np.asarray(problem.f(qx, qy))

    # phi[i](q-th point) = _QPOINTS[q, i]
    phi = _QPOINTS.T  # (i, q)

    K = np.zeros((ntri, 3, 3))
    M = np.zeros((ntri, 3, 3))
    load_el = np.zeros((ntri, 3))
    mu_int = (w * mu).sum(axis=1)
    for i in range(3):
        for j in range(3):
            K[:, i, j] += mu_int * (grads[:, i, :] * grads[:, j, :]).sum(axis=1)
            conv = b1 * grads[:, j, 0][:, None] + b2 * grads[:, j, 1][:, None]
            K[:, i, j] += (w * conv * phi[i]).sum(axis=1)
            K[:, i, j] += (w * sigma * phi[i] * phi[j]).sum(axis=1)
            M[:, i, j] += (w * phi[i] * phi[j]).sum(axis=1)
        load_el[:, i] = (w * fv * phi[i]).sum(axis=1)

    rows = np.repeat(mesh.triangles, 3, axis=1).ravel()
    cols = np.tile(mesh.triangles, (1, 3)).ravel()
    n = mesh.n_nodes
    A_full = sp.coo_matrix((K.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    M_full = sp.coo_matrix((M.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    load_full = np.bincount(mesh.triangles.ravel(), weights=load_el.ravel(), minlength=n)

    interior = np.flatnonzero(~mesh.boundary_mask)
    A_int = A_full[interior][:, interior].tocsr()
    M_int = M_full[interior][:, interior].tocsr()
    return Sparse2DSystem(mesh=mesh, mass=M_int, form=A_int,
                          load=load_full[interior], interior=interior)


def _to_grid(mesh, flat):
    dom = mesh.domain
    return SolutionGrid((dom.x_min, dom.x_max, dom.y_min, dom.y_max),
                        mesh.node_grid_values(flat))


def solve_stationary_2d(problem, mesh):
    """Direct sparse solve of the stationary problem; returns the nodal grid."""
    sys2d = assemble_2d(problem, mesh)
    try:
        u_int = spla.spsolve(sys2d.form.tocsc(), sys2d.load)
    except RuntimeError as exc:  # umfpack/superlu singular-matrix failure
        raise SingularSystemError(str(exc)) from exc
    if not np.all(np.isfinite(u_int)):
        raise SingularSystemError("stationary 2D solve produced non-finite values")
    full = np.zeros(mesh.n_nodes)
    full[sys2d.interior] = u_int
    return _to_grid(mesh, full)


def step_theta_2d(sys2d, u, theta, dt):
    """One step of the one-step recurrence with the sparse 2D matrices.

    u is the full nodal vector (boundary entries zero); returns the same shape.
    """
    ui = u[sys2d.interior]
    rhs = sys2d.load - sys2d.form @ ui
    du = sys2d.factor(theta, dt).solve(rhs)
    out = u.copy()
    out[sys2d.interior] = ui + dt * du
    return out


def solve_transient_2d(problem, mesh, theta, dt, steps, u0=None):
    """Run the unsplit recurrence for a fixed number of steps."""
    sys2d = assemble_2d(problem, mesh)
    u = np.zeros(mesh.n_nodes) if u0 is None else u0.copy()
    for _ in range(steps):
        u = step_theta_2d(sys2d, u, theta, dt)
    return _to_grid(mesh, u)


def compare(a, b):
    """Relative errors of a against b over grid nodes: (L-infinity, L1)."""
    if a.values.shape != b.values.shape:
        raise ValueError("solution grids have different shapes")
    denom_inf = float(np.max(np.abs(b.values)))
    denom_l1 = float(np.sum(np.abs(b.values)))
    if denom_inf == 0.0:
        raise ZeroDivisionError("comparison baseline is identically zero")
    err = np.abs(a.values - b.values)
    return float(np.max(err)) / denom_inf, float(np.sum(err)) / denom_l1
