# Test final data, the heat and level-set solvers and the classic formula
import os
import tempfile
import unittest

import numpy as np

from regretbench.errors import (ConfigError, DerivativeUnavailable,
                                DomainTruncationWarning, FinalDataViolation,
                                GridOutOfRange, ValidationError)
from regretbench.pde import classic
from regretbench.pde.checks import (GRID_FIELDS, dump_grid, property_check,
                                    residual_check)
from regretbench.pde.finaldata import (ClassicData, EnvelopeData,
                                       SeparableData, final_from_json,
                                       linear_data, smooth_abs_data)
from regretbench.pde.heat import heat_solve
from regretbench.pde.levelset import levelset_solve, solve_level
from regretbench.pde.solutions import (ClassicSolution, SeparableSolution,
                                       bounding_solutions, classic_solution,
                                       solve_pde)

from fixtures import uneven_pair, sample_points, smooth_fixtures


class TestClassicProfile(unittest.TestCase):

    def test_ode(self):
        z = np.linspace(-5.0, 5.0, 100)
        for C in (0.5, 1.0, 2.0):
            self.assertLess(np.max(np.abs(classic.ode_residual(z, C))), 1e-9)

    def test_profile_at_zero(self):
        for C in (0.36, 1.0, 2.0):
            self.assertAlmostEqual(float(classic.profile(0.0, C)),
                                   np.sqrt(C / (2 * np.pi)), places=14)

    def test_asymptotics(self):
        self.assertAlmostEqual(float(classic.profile(40.0, 1.0)) / 40.0, 0.5,
                               places=12)

    def test_probe_value(self):
        sol = classic_solution(2.0, 1.0)
        self.assertAlmostEqual(float(sol.value(0.0, 0.0, 0.0)),
                               np.sqrt(1.0 / np.pi), places=14)
        self.assertAlmostEqual(float(sol.value(0.75, 0.0, 0.0)),
                               np.sqrt(0.25 * 2.0 / (2 * np.pi)), places=14)

    def test_final_time(self):
        sol = classic_solution(1.0, 1.0)
        self.assertAlmostEqual(float(sol.value(1.0, -0.4, 0.2)), 0.3)
        with self.assertRaises(DerivativeUnavailable):
            sol.evaluate(1.0, 0.0, 0.0)
        with self.assertRaises(ValidationError):
            sol.value(1.5, 0.0, 0.0)

    def test_smoothed_solutions(self):
        C, T, delta = 1.0, 1.0, 0.01
        exact = classic_solution(C, T)
        above = classic_solution(C, T, delta, 'above')
        below = classic_solution(C, T, delta, 'below')
        t, xi = np.meshgrid(np.linspace(0, 1, 6), np.linspace(-2, 2, 9))
        u = exact.value(t, xi, 0.0)
        self.assertTrue(np.all(above.value(t, xi, 0.0) >= u - 1e-15))
        self.assertTrue(np.all(below.value(t, xi, 0.0) <= u + 1e-15))
        self.assertTrue(np.all(np.isfinite(above.evaluate(T, xi, 0.0).D)))


class TestFinalData(unittest.TestCase):

    def test_classic(self):
        data = ClassicData()
        self.assertEqual(float(data.value(-0.4, 0.2)), 0.3)
        self.assertTrue(data.check(np.linspace(-1, 1, 11), 0.0))

    def test_smooth_abs_conditions(self):
        data = smooth_abs_data()
        self.assertTrue(data.check(np.linspace(-3, 3, 13), 0.0,
                                   convexity=True))
        with self.assertRaises(FinalDataViolation):
            smooth_abs_data(a=0.8, c=0.5)

    def test_convexity_violation(self):
        data = SeparableData(0.5, lambda x: -0.1 * x ** 2,
                             lambda x: -0.2 * x, lambda x: -0.2 + 0 * x)
        xi = np.linspace(-1, 1, 5)
        self.assertTrue(data.check(xi, 0.0))
        with self.assertRaises(FinalDataViolation) as ctx:
            data.check(xi, 0.0, convexity=True)
        self.assertIn('convexity', str(ctx.exception))

    def test_slope_violation(self):
        data = SeparableData(0.5, lambda x: x, lambda x: 1 + 0 * x,
                             lambda x: 0 * x)
        with self.assertRaises(FinalDataViolation):
            data.check([0.0], [0.0])

    def test_monotonicity(self):
        with self.assertRaises(FinalDataViolation):
            linear_data(c=0.0)

    def test_envelope(self):
        xi = np.linspace(-2, 2, 21)
        above = EnvelopeData(0.05)
        below = EnvelopeData(0.05, side='below')
        phi = ClassicData().value(xi, 0.0)
        self.assertTrue(np.all(above.value(xi, 0.0) >= phi))
        self.assertTrue(np.all(below.value(xi, 0.0) <= phi + 1e-15))
        self.assertTrue(above.check(xi, 0.0, convexity=True))

    def test_json(self):
        data = final_from_json({'kind': 'smooth-abs', 'a': 0.25})
        self.assertAlmostEqual(float(data.value(0.0, 1.0)), 0.75)
        with self.assertRaises(ConfigError):
            final_from_json({'kind': 'nope'})
        with self.assertRaises(ConfigError):
            final_from_json({'kind': 'classic', 'a': 1})

    def test_solve_level(self):
        data = smooth_fixtures()[1]
        xi = np.linspace(-2, 2, 7)
        y = np.linspace(-1, 2, 7)
        eta = solve_level(data, xi, y)
        np.testing.assert_allclose(data.value(xi, eta), y, atol=1e-12)


class TestHeat(unittest.TestCase):

    def test_quadrature_matches_classic(self):
        C, T = 1.0, 1.0
        heat = SeparableSolution(ClassicData(), C, T)
        exact = classic_solution(C, T)
        t, xi, eta = (a.ravel() for a in np.meshgrid(
            [0.0, 0.5, 0.9, 0.99], np.linspace(-2, 2, 17), [0.0, 0.7]))
        np.testing.assert_allclose(heat.value(t, xi, eta),
                                   exact.value(t, xi, eta), atol=1e-8)
        a, b = heat.evaluate(t, xi, eta), exact.evaluate(t, xi, eta)
        np.testing.assert_allclose(a.u_xi, b.u_xi, atol=1e-8)
        np.testing.assert_allclose(a.D, b.D, atol=1e-7)

    def test_residual(self):
        heat = heat_solve(lambda x: np.sqrt(1 + x ** 2), 0.7, 1.0)
        r = heat.residual(np.array([0.0, 0.3, 0.6]), np.array([-1, 0, 1.5]))
        self.assertLess(float(np.max(np.abs(r))), 1e-6)

    def test_derivative_fallbacks(self):
        f = lambda x: np.sqrt(1 + x ** 2)
        df = lambda x: x / np.sqrt(1 + x ** 2)
        d2f = lambda x: 1 / (1 + x ** 2) ** 1.5
        t, xi = np.full(5, 0.4), np.linspace(-1, 1, 5)
        full = heat_solve(f, 1.0, 1.0, df, d2f).derivatives(t, xi)
        for partial in (heat_solve(f, 1.0, 1.0, df),
                        heat_solve(f, 1.0, 1.0)):
            d = partial.derivatives(t, xi)
            np.testing.assert_allclose(d.v_xi, full.v_xi, atol=1e-8)
            np.testing.assert_allclose(d.v_xixi, full.v_xixi, atol=1e-7)

    def test_symmetry_in_xi(self):
        t, xi = (a.ravel() for a in np.meshgrid([0.0, 0.4, 0.8],
                                                np.linspace(0.25, 2.0, 8)))
        odd = heat_solve(np.tanh, 1.3, 1.0)
        even = heat_solve(lambda x: np.sqrt(1 + x ** 2), 1.3, 1.0)
        np.testing.assert_allclose(odd.value(t, -xi), -odd.value(t, xi),
                                   atol=1e-12)
        np.testing.assert_allclose(even.value(t, -xi), even.value(t, xi),
                                   atol=1e-12)
        # c eta + odd phi_bar: u - c eta is odd in xi at every t
        sol = SeparableSolution(SeparableData(0.5, lambda x: 0.4 * np.tanh(x)),
                                0.68, 1.0)
        eta = np.full_like(xi, 0.3)
        np.testing.assert_allclose(sol.value(t, -xi, eta) - 0.15,
                                   0.15 - sol.value(t, xi, eta), atol=1e-12)

    def test_truncation_warning(self):
        heat = heat_solve(lambda x: x ** 2, 1.0, 1.0, domain=(-1.0, 1.0))
        with self.assertWarns(DomainTruncationWarning):
            heat.value(0.0, 0.9)


class TestLevelSet(unittest.TestCase):

    def test_two_paths_agree(self):
        data = smooth_fixtures()[0]
        C, T = 0.8, 1.0
        separable = SeparableSolution(data, C, T)
        level = levelset_solve(data, C, T)
        t, xi, eta = (a.ravel() for a in np.meshgrid(
            [0.0, 0.5, 0.9], np.linspace(-2, 2, 9), [-0.5, 0.0, 1.0]))
        a, b = separable.evaluate(t, xi, eta), level.evaluate(t, xi, eta)
        np.testing.assert_allclose(a.u, b.u, atol=1e-6)
        np.testing.assert_allclose(a.u_xi, b.u_xi, atol=1e-6)
        np.testing.assert_allclose(a.u_eta, b.u_eta, atol=1e-6)
        np.testing.assert_allclose(a.D, b.D, atol=1e-6)

    def test_composite_is_transformed_heat_solution(self):
        data = smooth_fixtures()[2]
        inner = SeparableSolution(smooth_abs_data(a=0.5, width=1.0, c=1.0),
                                  1.0, 1.0)
        sol = solve_pde(data, 1.0, 1.0)
        t, xi, eta = (a.ravel() for a in np.meshgrid(
            [0.0, 0.5], np.linspace(-2, 2, 5), [-1.0, 0.5]))
        s = inner.value(t, xi, eta)
        np.testing.assert_allclose(sol.value(t, xi, eta),
                                   s + 0.5 * np.tanh(s), atol=1e-6)

    def test_grid_bracket(self):
        data = smooth_fixtures()[1]
        local = levelset_solve(data, 1.0, 1.0)
        gridded = levelset_solve(data, 1.0, 1.0,
                                 y_grid=np.linspace(-6, 6, 49))
        xi, eta = np.linspace(-1, 1, 5), np.linspace(-1, 1, 5)
        np.testing.assert_allclose(gridded.value(0.3, xi, eta),
                                   local.value(0.3, xi, eta), atol=1e-10)
        with self.assertRaises(GridOutOfRange):
            gridded.value(0.3, 0.0, 50.0)

    def test_linear_data(self):
        sol = solve_pde(linear_data(2.0), 1.0, 1.0)
        p = sol.evaluate(0.2, 0.5, 0.3)
        self.assertAlmostEqual(float(p.u), 0.6, places=10)
        self.assertAlmostEqual(float(p.u_t), 0.0, places=10)


class TestPropertyPropagation(unittest.TestCase):

    def test_smooth_fixtures(self):
        points = sample_points()
        for data in smooth_fixtures():
            sol = solve_pde(data, 1.0, 1.0)
            props = property_check(sol, points)
            self.assertGreaterEqual(props.min_u_eta, data.c - 1e-8, data.name)
            self.assertLessEqual(props.max_slope_excess, 1e-8, data.name)
            self.assertLessEqual(props.max_u_t, 1e-8, data.name)
            report = residual_check(sol, points, h=1e-3)
            self.assertLessEqual(report.fd_residual, 1e-5, data.name)
            self.assertLessEqual(report.pde_residual, 1e-8, data.name)

    def test_classic_residual(self):
        report = residual_check(classic_solution(0.68, 1.0),
                                sample_points(), h=1e-4)
        self.assertLess(report.pde_residual, 1e-12)
        self.assertLess(report.max_derivative_error, 1e-5)

    def test_regret_coordinates(self):
        p = classic_solution(1.0, 1.0).evaluate(0.5, 0.3, 0.0)
        w_q, w_r = p.weights
        self.assertAlmostEqual(float(w_q + w_r), 1.0)
        self.assertAlmostEqual(float(p.u_x1), float(p.u_xi + p.u_eta))
        self.assertEqual(p.hessian.shape, (2, 2))


class TestBounds(unittest.TestCase):

    def test_bounding_solutions(self):
        bounds = bounding_solutions(uneven_pair, ClassicData(), 1.0)
        self.assertAlmostEqual(bounds.C_upper, 0.68, places=10)
        self.assertAlmostEqual(bounds.C_lower, 0.68, places=10)
        self.assertIsInstance(bounds.upper, ClassicSolution)

    def test_envelope_uses_shifted_classic(self):
        sol = solve_pde(EnvelopeData(0.1, C=0.5), 0.5, 1.0)
        self.assertIsInstance(sol, ClassicSolution)
        self.assertAlmostEqual(float(sol.value(0.0, 0.2, 0.0)),
                               float(classic_solution(0.5, 1.1)
                                     .value(0.0, 0.2, 0.0)), places=12)

    def test_dump_grid(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = dump_grid(classic_solution(1.0, 1.0),
                             os.path.join(tmp, 'grid.csv'), [0.0, 0.5],
                             [-1.0, 0.0, 1.0], [0.0])
            with open(path) as f:
                lines = f.read().splitlines()
        self.assertEqual(lines[0].split(','), GRID_FIELDS)
        self.assertEqual(len(lines), 1 + 6)


if __name__ == '__main__':
    unittest.main()
