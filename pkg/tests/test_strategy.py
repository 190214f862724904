# Test the simplex solver, the cycle LPs and the closed-form indifference
import unittest

import numpy as np

from regretbench.errors import UnsupportedDepth
from regretbench.experts import random_pair
from regretbench.graph.debruijn import DeBruijnGraph, enumerate_simple_cycles
from regretbench.strategy.cyclelp import (LpSolution, LpStatus, Side,
                                          build_cycle_lp, build_lp,
                                          cycle_residuals,
                                          diffusion_constants,
                                          dual_mixed_strategy,
                                          euler_row_sum, is_feasible,
                                          lp_to_table, solve,
                                          verify_indifference,
                                          zero_beta_bounds)
from regretbench.strategy.indifference import (closed_form_beta,
                                               indifference_closed_form)
from regretbench.strategy.simplex import SimplexSolver, SimplexStatus

from fixtures import uneven_pair

CYCLES = {d: enumerate_simple_cycles(DeBruijnGraph(d)) for d in range(1, 5)}


class TestSimplex(unittest.TestCase):

    def test_small_program(self):
        # min x1 + 2 x2 + 3 x3, x1 + x2 + x3 = 1, x1 - x2 = 0
        result = SimplexSolver([[1, 1, 1], [1, -1, 0]], [1, 0],
                               [1, 2, 3]).solve()
        self.assertIs(result.status, SimplexStatus.OPTIMAL)
        np.testing.assert_allclose(result.x, [0.5, 0.5, 0.0], atol=1e-12)
        self.assertAlmostEqual(result.objective, 1.5)
        self.assertAlmostEqual(float(result.multipliers @ [1, 0]), 1.5)

    def test_maximize(self):
        result = SimplexSolver([[1, 1]], [2], [3, 1], maximize=True).solve()
        self.assertAlmostEqual(result.objective, 6.0)

    def test_infeasible(self):
        result = SimplexSolver([[1, 1]], [-1], [1, 1]).solve()
        self.assertIs(result.status, SimplexStatus.INFEASIBLE)

    def test_unbounded(self):
        result = SimplexSolver([[1, -1]], [0], [1, 0], maximize=True).solve()
        self.assertIs(result.status, SimplexStatus.UNBOUNDED)


class TestCycleLp(unittest.TestCase):

    def test_depth_one_pair(self):
        upper = solve(build_lp(uneven_pair, CYCLES[1], Side.INVESTOR))
        lower = solve(build_lp(uneven_pair, CYCLES[1], Side.MARKET))
        self.assertAlmostEqual(upper.M, 0.68, places=10)
        self.assertAlmostEqual(lower.M, 0.68, places=10)
        np.testing.assert_allclose(closed_form_beta(uneven_pair.gamma)[0],
                                   [-0.32, -0.32])

    def test_rows(self):
        lp = build_lp(uneven_pair, CYCLES[1], Side.INVESTOR)
        self.assertEqual(lp.A.shape, (3, 3))
        np.testing.assert_allclose(lp.lengths, [1, 1, 2])
        np.testing.assert_allclose(lp.cycle_averages, [1.0, 0.36, 0.68])
        self.assertIn('010', lp_to_table(lp))

    def test_coalescence(self):
        for d in range(1, 5):
            for seed in range(200):
                e = random_pair(d, seed)
                upper, lower = diffusion_constants(e, CYCLES[d])
                mean = float(np.mean(e.gamma))
                self.assertAlmostEqual(upper, mean, delta=1e-8)
                self.assertAlmostEqual(lower, mean, delta=1e-8)

    def test_solutions_are_feasible(self):
        for d in range(1, 5):
            e = random_pair(d, 11)
            for side in Side:
                lp = build_lp(e, CYCLES[d], side)
                sol = solve(lp)
                self.assertIs(sol.status, LpStatus.OPTIMAL)
                self.assertTrue(is_feasible(sol, lp))

    def test_depth_five_ordering(self):
        cycles = enumerate_simple_cycles(DeBruijnGraph(5))
        self.assertEqual(len(cycles), 30176)
        for seed in range(6):
            upper, lower = diffusion_constants(random_pair(5, seed), cycles)
            self.assertLessEqual(lower, upper + 1e-9)

    def test_swap_keeps_diffusion_constants(self):
        for d in range(1, 4):
            e = random_pair(d, 21)
            np.testing.assert_allclose(
                diffusion_constants(e.swapped(), CYCLES[d]),
                diffusion_constants(e, CYCLES[d]), atol=1e-9)

    def test_zero_beta_bounds(self):
        for d in range(1, 5):
            e = random_pair(d, 3)
            lp = build_lp(e, CYCLES[d], Side.INVESTOR)
            upper, lower = zero_beta_bounds(lp)
            M = float(np.mean(e.gamma))
            self.assertGreaterEqual(upper, M - 1e-12)
            self.assertLessEqual(lower, M + 1e-12)

    def test_euler_row_sum(self):
        for d in range(1, 5):
            lp = build_lp(random_pair(d, 5), CYCLES[d], Side.INVESTOR)
            total = euler_row_sum(lp, DeBruijnGraph(d))
            np.testing.assert_allclose(total[:2 ** d], 0.0)
            self.assertEqual(total[-1], -2 ** (d + 1))

    def test_dual_mixed_strategy(self):
        e = random_pair(3, 9)
        lp = build_lp(e, CYCLES[3], Side.INVESTOR)
        mixed = dual_mixed_strategy(lp)
        self.assertAlmostEqual(mixed.p.sum(), 1.0)
        np.testing.assert_allclose(mixed.cancellation(), 0.0, atol=1e-9)
        self.assertAlmostEqual(mixed.value, float(np.mean(e.gamma)),
                               delta=1e-8)


class TestIndifference(unittest.TestCase):

    def test_closed_form_residuals(self):
        rng = np.random.default_rng(42)
        for d in (2, 3, 4):
            self.assertEqual(len(CYCLES[d]), {2: 6, 3: 19, 4: 179}[d])
            for _ in range(100):
                gamma = rng.uniform(0.0, 1.0, size=2 ** d)
                beta, M = closed_form_beta(gamma)
                lp = build_cycle_lp(gamma, CYCLES[d], Side.INVESTOR)
                sol = LpSolution(beta, M, LpStatus.OPTIMAL, 'closed-form')
                report = verify_indifference(sol, lp, tol=1e-9)
                self.assertTrue(report.passed, report.max_abs)

    def test_beta_depends_on_recent_moves_only(self):
        beta, _ = closed_form_beta(np.linspace(0.1, 0.9, 8))
        np.testing.assert_allclose(beta[:4], beta[4:])

    def test_expert_pair_solution(self):
        e = random_pair(2, 1)
        sol = indifference_closed_form(e)
        residuals = cycle_residuals(sol, build_lp(e, CYCLES[2],
                                                  Side.MARKET))
        np.testing.assert_allclose(residuals, 0.0, atol=1e-9)

    def test_depth_five_unsupported(self):
        with self.assertRaises(UnsupportedDepth):
            closed_form_beta(np.ones(32))


if __name__ == '__main__':
    unittest.main()
