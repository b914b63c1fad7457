import numpy as np
import pytest

from adr_split import fem1d, tracer
from adr_split.errors import SingularSystemError
from adr_split.fem1d import Bands, CurveSolution, Tridiagonal1DSystem
from adr_split.problem import problem_from_strings


def straight_curve(length=1.0):
    return tracer.IntegralCurve(
        nodes=np.array([[0.0, 0.0], [length, 0.0]]),
        arclen=np.array([0.0, length]),
        family="beta", seed_param=0.0)


def uniform_mesh(n_el, length=1.0):
    curve = straight_curve(length)
    coords = np.linspace(0.0, length, n_el + 1)
    points = np.column_stack((coords, np.zeros(n_el + 1)))
    return curve, fem1d.Mesh1D(coords=coords, points=points, curve=curve)


def scalar_system(m=1.0, a=1.0, load=0.0):
    empty = np.array([])
    return Tridiagonal1DSystem.from_interior(
        Bands(empty, np.array([m]), empty.copy()),
        Bands(empty.copy(), np.array([a]), empty.copy()),
        np.array([load]))


class TestAssembly:
    def test_m_form_two_elements(self):
        prob = problem_from_strings(mu="1", sigma="1", beta1="1", beta2="0", f="1")
        curve, mesh = uniform_mesh(2)
        sys_m = fem1d.assemble(curve, mesh, prob, "m")
        np.testing.assert_allclose(sys_m.form_interior.diag, [4.0])
        np.testing.assert_allclose(sys_m.mass_interior.diag, [1.0 / 3.0])
        np.testing.assert_allclose(sys_m.load, 0.0)  # m-substep carries no source

    def test_s_form_pure_advection(self):
        prob = problem_from_strings(mu="0", sigma="0", beta1="1", beta2="0", f="0")
        curve, mesh = uniform_mesh(8)
        sys_s = fem1d.assemble(curve, mesh, prob, "s")
        np.testing.assert_allclose(sys_s.form_interior.diag, 0.0, atol=1e-15)
        np.testing.assert_allclose(sys_s.form_interior.upper, 0.5, atol=1e-15)
        np.testing.assert_allclose(sys_s.form_interior.lower, -0.5, atol=1e-15)

    def test_zero_source_gives_zero_load(self):
        prob = problem_from_strings(mu="1", sigma="1", beta1="1", beta2="0", f="0")
        curve, mesh = uniform_mesh(6)
        assert np.all(fem1d.assemble(curve, mesh, prob, "s").load == 0.0)

    def test_mass_matrix_row_sums_are_basis_integrals(self):
        # partition of unity: row i of M sums to the integral of basis i,
        # i.e. half the support length
        prob = problem_from_strings(mu="1", sigma="1", beta1="1", beta2="0", f="1")
        curve, mesh = uniform_mesh(5)
        sys_s = fem1d.assemble(curve, mesh, prob, "s")
        h = np.diff(mesh.coords)
        support = np.concatenate(([h[0]], h[:-1] + h[1:], [h[-1]]))
        np.testing.assert_allclose(sys_s.mass.row_sums(), 0.5 * support)

    def test_mass_and_m_form_symmetric(self):
        prob = problem_from_strings(mu="2.5", sigma="1", beta1="1", beta2="0", f="1")
        curve, mesh = uniform_mesh(7)
        sys_m = fem1d.assemble(curve, mesh, prob, "m")
        np.testing.assert_array_equal(sys_m.mass.lower, sys_m.mass.upper)
        np.testing.assert_array_equal(sys_m.form.lower, sys_m.form.upper)

    def test_m_form_interior_rows_annihilate_constants(self):
        prob = problem_from_strings(mu="1.7", sigma="1", beta1="1", beta2="0", f="0")
        curve, mesh = uniform_mesh(9)
        sys_m = fem1d.assemble(curve, mesh, prob, "m")
        row_sums = sys_m.form.row_sums()
        np.testing.assert_allclose(row_sums[1:-1], 0.0, atol=1e-14)

    def test_minimum_element_count(self):
        curve = straight_curve(0.01)
        mesh = fem1d.build_mesh(curve, h_fem=1.0)
        assert mesh.n_elements == 4

    def test_invalid_kind(self):
        prob = problem_from_strings()
        curve, mesh = uniform_mesh(4)
        with pytest.raises(ValueError):
            fem1d.assemble(curve, mesh, prob, "q")


class TestThetaStep:
    def test_scalar_recurrence(self):
        sys1 = scalar_system(m=1.0, a=1.0, load=0.0)
        u0 = CurveSolution(np.array([0.0, 1.0, 0.0]))
        u1 = fem1d.theta_step(sys1, u0, theta=0.5, dt=0.1)
        assert abs(u1.values[1] - 0.9047619047619048) < 1e-12

    def test_discrete_equilibrium_is_fixed_point(self):
        prob = problem_from_strings(mu="1", sigma="2", beta1="3", beta2="0", f="0")
        curve, mesh = uniform_mesh(12)
        sys_s = fem1d.assemble(curve, mesh, prob, "s")
        u = np.zeros(13)
        u[1:-1] = np.sin(np.linspace(0.1, 2.0, 11))
        sys_s.load[:] = 0.0
        sys_s.load[1:-1] = sys_s.form_interior.matvec(u[1:-1])
        out = fem1d.theta_step(sys_s, CurveSolution(u, mesh), theta=0.5, dt=0.05)
        np.testing.assert_array_equal(out.values, u)

    def test_theta_zero_is_explicit_euler(self):
        sys1 = scalar_system(m=2.0, a=3.0, load=1.0)
        u0 = CurveSolution(np.array([0.0, 0.5, 0.0]))
        u1 = fem1d.theta_step(sys1, u0, theta=0.0, dt=0.1)
        # M du = load - A u  =>  du = (1 - 1.5)/2 = -0.25
        assert np.isclose(u1.values[1], 0.5 + 0.1 * (-0.25))

    def test_boundary_values_stay_zero(self):
        prob = problem_from_strings(mu="1", sigma="1", beta1="2", beta2="0", f="3")
        curve, mesh = uniform_mesh(10)
        sys_s = fem1d.assemble(curve, mesh, prob, "s")
        u = fem1d.theta_step(sys_s, CurveSolution(np.zeros(11), mesh), 0.5, 0.01)
        assert u.values[0] == 0.0 and u.values[-1] == 0.0

    @pytest.mark.parametrize("theta", [0.5, 0.9])
    def test_diffusive_substep_does_not_grow_mass_norm(self, rng, theta):
        prob = problem_from_strings(mu="1", sigma="1", beta1="1", beta2="0", f="0")
        curve, mesh = uniform_mesh(20)
        sys_m = fem1d.assemble(curve, mesh, prob, "m")
        u = np.zeros(21)
        u[1:-1] = rng.standard_normal(19)
        m_norm = lambda v: v[1:-1] @ sys_m.mass_interior.matvec(v[1:-1])
        before = m_norm(u)
        after = m_norm(fem1d.theta_step(sys_m, CurveSolution(u, mesh), theta, 0.05).values)
        assert after <= before + 1e-12


class TestStationary:
    def test_zero_source(self):
        prob = problem_from_strings(mu="1", sigma="1", beta1="1", beta2="0", f="0")
        curve, mesh = uniform_mesh(8)
        u = fem1d.stationary_solve(fem1d.assemble(curve, mesh, prob, "s"))
        assert np.all(u.values == 0.0)

    @staticmethod
    def reaction_diffusion_exact(x):
        # -u'' + u = 1, u(0) = u(1) = 0
        return 1.0 - np.cosh(x - 0.5) / np.cosh(0.5)

    @staticmethod
    def advection_reaction_diffusion_exact(x):
        # -u'' + u' + u = 1, u(0) = u(1) = 0; roots (1 +- sqrt(5))/2
        r1 = (1.0 + np.sqrt(5.0)) / 2.0
        r2 = (1.0 - np.sqrt(5.0)) / 2.0
        A = np.array([[1.0, 1.0], [np.exp(r1), np.exp(r2)]])
        c1, c2 = np.linalg.solve(A, [-1.0, -1.0])
        return 1.0 + c1 * np.exp(r1 * x) + c2 * np.exp(r2 * x)

    def errors_for(self, beta1, exact, sizes):
        prob = problem_from_strings(mu="1", sigma="1", beta1=beta1, beta2="0", f="1")
        errs = []
        for n in sizes:
            curve, mesh = uniform_mesh(n)
            u = fem1d.stationary_solve(fem1d.assemble(curve, mesh, prob, "s"))
            errs.append(np.abs(u.values - exact(mesh.coords)).max())
        return errs

    def test_reaction_diffusion_oracle_second_order(self):
        errs = self.errors_for("0", self.reaction_diffusion_exact, (16, 32, 64))
        for e0, e1 in zip(errs, errs[1:]):
            assert 3.5 <= e0 / e1 <= 4.5

    def test_advection_reaction_diffusion_oracle_second_order(self):
        errs = self.errors_for("1", self.advection_reaction_diffusion_exact, (16, 32, 64))
        for e0, e1 in zip(errs, errs[1:]):
            assert 3.5 <= e0 / e1 <= 4.5


class TestTridiagonal:
    def test_identity(self):
        x = fem1d.solve_tridiagonal(np.zeros(2), np.ones(3), np.zeros(2),
                                    np.array([3.0, -1.0, 2.0]))
        np.testing.assert_array_equal(x, [3.0, -1.0, 2.0])

    def test_three_by_three(self):
        x = fem1d.solve_tridiagonal(np.array([-1.0, -1.0]), np.array([2.0, 2.0, 2.0]),
                                    np.array([-1.0, -1.0]), np.ones(3))
        np.testing.assert_allclose(x, [1.5, 2.0, 1.5])

    def test_one_by_one(self):
        x = fem1d.solve_tridiagonal(np.array([]), np.array([4.0]), np.array([]),
                                    np.array([2.0]))
        np.testing.assert_array_equal(x, [0.5])

    def test_residual_on_random_systems(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 60))
            lower = rng.standard_normal(n - 1)
            upper = rng.standard_normal(n - 1)
            diag = np.abs(rng.standard_normal(n)) + 3.0  # diagonally dominant
            rhs = rng.standard_normal(n)
            x = fem1d.solve_tridiagonal(lower, diag, upper, rhs)
            res = Bands(lower, diag, upper).matvec(x) - rhs
            assert np.abs(res).max() <= 1e-10 * max(np.abs(rhs).max(), 1.0)

    def test_zero_pivot_raises(self):
        with pytest.raises(SingularSystemError):
            fem1d.solve_tridiagonal(np.array([1.0]), np.array([0.0, 1.0]),
                                    np.array([1.0]), np.array([1.0, 1.0]))
