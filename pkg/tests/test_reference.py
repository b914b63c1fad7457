import numpy as np
import pytest

from adr_split import reference
from adr_split.field import DomainRect
from adr_split.problem import problem_from_strings
from adr_split.transfer import SolutionGrid

UNIT_SQUARE = DomainRect(0.0, 1.0, 0.0, 1.0)
PI = "3.14159265358979312"


def manufactured_problem():
    # exact solution sin(pi x) sin(pi y) for the pure-diffusion problem
    return problem_from_strings(
        mu="1", sigma="0", beta1="0", beta2="0",
        f=f"2*{PI}^2*sin({PI}*x)*sin({PI}*y)")


def manufactured_error(n):
    prob = manufactured_problem()
    mesh = reference.build_tri_mesh(prob.domain, n, n)
    grid = reference.solve_stationary_2d(prob, mesh)
    xs, ys = grid.node_coords()
    X, Y = np.meshgrid(xs, ys)
    return np.abs(grid.values - np.sin(np.pi * X) * np.sin(np.pi * Y)).max()


class TestMesh:
    def test_default_mesh_has_450_elements(self):
        mesh = reference.build_tri_mesh(UNIT_SQUARE)
        assert mesh.n_elements == 450

    def test_triangles_positively_oriented(self):
        mesh = reference.build_tri_mesh(UNIT_SQUARE, 4, 3)
        v = mesh.nodes[mesh.triangles]
        area2 = ((v[:, 1, 0] - v[:, 0, 0]) * (v[:, 2, 1] - v[:, 0, 1])
                 - (v[:, 2, 0] - v[:, 0, 0]) * (v[:, 1, 1] - v[:, 0, 1]))
        assert np.all(area2 > 0)

    def test_boundary_flags(self):
        mesh = reference.build_tri_mesh(UNIT_SQUARE, 3, 3)
        on_edge = np.isclose(mesh.nodes[:, 0], 0) | np.isclose(mesh.nodes[:, 0], 1) \
            | np.isclose(mesh.nodes[:, 1], 0) | np.isclose(mesh.nodes[:, 1], 1)
        np.testing.assert_array_equal(mesh.boundary_mask, on_edge)


class TestAssembly:
    def test_laplacian_five_point_stencil(self):
        # P1 on a single-diagonal triangulation reproduces the 5-point stencil
        prob = problem_from_strings(mu="1", sigma="0", beta1="0", beta2="0", f="0")
        mesh = reference.build_tri_mesh(UNIT_SQUARE, 8, 8)
        sys2d = reference.assemble_2d(prob, mesh)
        A = sys2d.form.toarray()
        n_in = 7  # interior nodes per row
        center = (n_in // 2) * n_in + n_in // 2
        assert np.isclose(A[center, center], 4.0)
        assert np.isclose(A[center, center + 1], -1.0)
        assert np.isclose(A[center, center - 1], -1.0)
        assert np.isclose(A[center, center + n_in], -1.0)
        assert np.isclose(A[center, center - n_in], -1.0)
        assert np.isclose(A[center, center + n_in + 1], 0.0)
        assert np.isclose(A[center].sum(), 0.0)

    def test_reaction_only_form_equals_scaled_mass(self):
        prob = problem_from_strings(mu="0", sigma="2.5", beta1="0", beta2="0", f="0")
        mesh = reference.build_tri_mesh(UNIT_SQUARE, 5, 5)
        sys2d = reference.assemble_2d(prob, mesh)
        diff = (sys2d.form - 2.5 * sys2d.mass).toarray()
        assert np.abs(diff).max() < 1e-14

    def test_zero_source_zero_load(self):
        prob = problem_from_strings(mu="1", sigma="1", beta1="1", beta2="0", f="0")
        mesh = reference.build_tri_mesh(UNIT_SQUARE, 4, 4)
        assert np.all(reference.assemble_2d(prob, mesh).load == 0.0)


class TestStationary:
    def test_manufactured_solution_second_order(self):
        errs = [manufactured_error(n) for n in (8, 16, 32)]
        for e0, e1 in zip(errs, errs[1:]):
            assert 3.5 <= e0 / e1 <= 4.5

    def test_zero_source_gives_zero(self):
        prob = problem_from_strings(mu="1", sigma="1", beta1="2", beta2="1", f="0")
        mesh = reference.build_tri_mesh(UNIT_SQUARE, 6, 6)
        grid = reference.solve_stationary_2d(prob, mesh)
        assert np.all(grid.values == 0.0)


class TestThetaStep:
    def test_equilibrium_is_fixed_point(self, rotating_problem):
        mesh = reference.build_tri_mesh(rotating_problem.domain, 6, 6)
        sys2d = reference.assemble_2d(rotating_problem, mesh)
        u = np.zeros(mesh.n_nodes)
        u[sys2d.interior] = np.linspace(0.1, 0.9, sys2d.interior.size)
        sys2d.load[:] = sys2d.form @ u[sys2d.interior]
        out = reference.step_theta_2d(sys2d, u, 0.5, 0.01)
        np.testing.assert_allclose(out, u, atol=1e-14)

    def test_zero_load_zero_state_stays_zero(self, rotating_problem):
        mesh = reference.build_tri_mesh(rotating_problem.domain, 6, 6)
        sys2d = reference.assemble_2d(rotating_problem, mesh)
        sys2d.load[:] = 0.0
        u = reference.step_theta_2d(sys2d, np.zeros(mesh.n_nodes), 0.5, 0.01)
        assert np.all(u == 0.0)


class TestCompare:
    def test_equal_grids(self):
        sg = SolutionGrid((0, 1, 0, 1), np.arange(9.0).reshape(3, 3) + 1.0)
        assert reference.compare(sg, sg) == (0.0, 0.0)

    def test_scaling(self):
        b = SolutionGrid((0, 1, 0, 1), np.full((3, 3), 2.0))
        a = SolutionGrid((0, 1, 0, 1), np.full((3, 3), 2.2))
        err_inf, err_l1 = reference.compare(a, b)
        assert np.isclose(err_inf, 0.1)
        assert np.isclose(err_l1, 0.1)

    def test_zero_baseline_raises(self):
        a = SolutionGrid((0, 1, 0, 1), np.ones((2, 2)))
        b = SolutionGrid((0, 1, 0, 1), np.zeros((2, 2)))
        with pytest.raises(ZeroDivisionError):
            reference.compare(a, b)

    def test_shape_mismatch(self):
        a = SolutionGrid((0, 1, 0, 1), np.ones((2, 2)))
        b = SolutionGrid((0, 1, 0, 1), np.ones((3, 3)))
        with pytest.raises(ValueError):
            reference.compare(a, b)
