# Test policies, game play, cycle diagnostics and eps sweeps
import csv
import math
import os
import tempfile
import unittest

import numpy as np

from regretbench.errors import PolicyError, ValidationError
from regretbench.game.setup import RegretPoint, game_config
from regretbench.pde.finaldata import smooth_abs_data
from regretbench.pde.solutions import classic_solution, solve_pde
from regretbench.play.policies import (CustomInvestor, FixedInvestor,
                                       RandomMarket, ScriptedMarket,
                                       investor_bid, make_investor,
                                       make_market, market_move,
                                       pde_strategies)
from regretbench.play.runner import (TRAJECTORY_FIELDS, cycle_diagnostics,
                                     run_game, worst_case_regret)
from regretbench.play.sweep import (fit_bound_constant, rate_scale,
                                    sweep_epsilon)
from regretbench.strategy.indifference import indifference_closed_form

from fixtures import coin_pair, uneven_pair


class TestRunGame(unittest.TestCase):

    def test_regret_bookkeeping(self):
        cfg = game_config(uneven_pair, '1/2')
        traj = run_game(cfg, FixedInvestor(0.25),
                        ScriptedMarket([1, -1, 1, 1]))
        self.assertEqual(traj.N, 4)
        self.assertEqual([s.b for s in traj.steps], [1, -1, 1, 1])
        x1, x2 = traj.regrets[-1]
        self.assertAlmostEqual(traj.point.x1, x1)
        self.assertAlmostEqual(traj.point.x2, x2)
        self.assertAlmostEqual(traj.final_regret, max(x1, x2))
        self.assertEqual(len(traj.states), 5)

    def test_bad_market_move(self):
        cfg = game_config(uneven_pair, '1/2')
        with self.assertRaises(PolicyError) as ctx:
            run_game(cfg, FixedInvestor(), ScriptedMarket([1, 0, 1, 1]))
        self.assertEqual(ctx.exception.step, 1)

    def test_failing_investor(self):
        cfg = game_config(uneven_pair, '1/2')
        investor = CustomInvestor(lambda t, m, xi, eta, eps: float('nan'))
        with self.assertRaises(PolicyError) as ctx:
            run_game(cfg, investor, RandomMarket())
        self.assertEqual(ctx.exception.step, 0)

    def test_clamping(self):
        cfg = game_config(uneven_pair, '1/2')
        investor = CustomInvestor(lambda t, m, xi, eta, eps: 2.0)
        traj = run_game(cfg, investor, ScriptedMarket([1] * 4))
        self.assertTrue(all(s.f == 1.0 and s.clamped for s in traj.steps))
        self.assertEqual(traj.clamp_count, 4)
        self.assertEqual(investor.clamp_events, 4)
        self.assertEqual(traj.to_json()['clamp_events'], 4)

    def test_trajectory_csv(self):
        cfg = game_config(uneven_pair, '1/4')
        traj = run_game(cfg, FixedInvestor(), RandomMarket(seed=1), seed=1)
        with tempfile.TemporaryDirectory() as tmp:
            path = traj.to_csv(os.path.join(tmp, 'trajectory_1.csv'))
            with open(path) as f:
                rows = list(csv.DictReader(f))
        self.assertEqual(len(rows), cfg.N)
        self.assertEqual(list(rows[0]), TRAJECTORY_FIELDS)

    def test_worst_case_fixed_bid(self):
        cfg = game_config(coin_pair, '1/2')
        traj = worst_case_regret(cfg, FixedInvestor(0.0))
        self.assertAlmostEqual(traj.final_regret, 1.0)
        with self.assertRaises(ValidationError):
            worst_case_regret(game_config(coin_pair, '1/8'), FixedInvestor())

    def test_single_decisions(self):
        self.assertEqual(investor_bid(FixedInvestor(-3.0), 0, 0, 0, 0, 0.5),
                         -1.0)
        self.assertEqual(market_move(ScriptedMarket([-1]), 0, 0, 0, 0, 0.2,
                                     0.5), -1)

    def test_unknown_policies(self):
        with self.assertRaises(ValidationError):
            make_investor('oracle', None, uneven_pair)
        with self.assertRaises(ValidationError):
            make_market('oracle', None, uneven_pair)


class TestPdePolicies(unittest.TestCase):

    def test_forcing_market_against_pde_investor(self):
        cfg = game_config(coin_pair, '1/16')
        strategies = pde_strategies(cfg)
        self.assertAlmostEqual(strategies.M_upper, strategies.M_lower)
        investor = make_investor('pde', strategies, coin_pair)
        market = make_market('forcing', strategies, coin_pair)
        traj = run_game(cfg, investor, market)
        # the bids match f* exactly, so every step is decided by X
        self.assertEqual(market.case_counts[2], cfg.N)
        self.assertAlmostEqual(traj.final_regret,
                               math.sqrt(1 / (2 * math.pi)), delta=0.05)

    def test_exhaustive_market_is_worst(self):
        cfg = game_config(coin_pair, '1/4')
        strategies = pde_strategies(cfg)
        u = float(classic_solution(strategies.M_upper, 1).value(0, 0, 0))
        worst = worst_case_regret(
            cfg, make_investor('pde', strategies, coin_pair))
        forced = run_game(cfg, make_investor('pde', strategies, coin_pair),
                          make_market('forcing', strategies, coin_pair))
        self.assertGreaterEqual(worst.final_regret,
                                forced.final_regret - 1e-12)
        self.assertLessEqual(worst.final_regret - u, cfg.eps)

    def test_investor_guarantee(self):
        deviations = {}
        for eps in ('1/8', '1/16'):
            cfg = game_config(coin_pair, eps)
            strategies = pde_strategies(cfg)
            u = float(classic_solution(strategies.M_upper, 1).value(0, 0, 0))
            markets = [make_market('forcing', strategies, coin_pair)]
            markets += [RandomMarket(seed) for seed in range(5)]
            deviations[cfg.eps] = [
                run_game(cfg, make_investor('pde', strategies, coin_pair),
                         market).final_regret - u
                for market in markets]
        check = fit_bound_constant(deviations, 'linear', slack=1.5)
        self.assertTrue(check.passed, check.results)

    def test_market_guarantee(self):
        deviations = {}
        for eps in ('1/8', '1/16'):
            cfg = game_config(coin_pair, eps)
            strategies = pde_strategies(cfg)
            u = float(classic_solution(strategies.M_lower, 1).value(0, 0, 0))
            investors = [make_investor('pde', strategies, coin_pair)]
            investors += [make_investor('perturbed', strategies, coin_pair,
                                        seed=seed) for seed in range(3)]
            deviations[cfg.eps] = [
                u - run_game(cfg, investor,
                             make_market('forcing', strategies,
                                         coin_pair)).final_regret
                for investor in investors]
        check = fit_bound_constant(deviations, 'linear', slack=1.5)
        self.assertTrue(check.passed, check.results)


class TestCycleDiagnostics(unittest.TestCase):

    def test_cycle_averages_match_rate(self):
        lp = indifference_closed_form(uneven_pair)
        self.assertAlmostEqual(lp.M, 0.68)
        sol = classic_solution(lp.M, 1, delta=100)
        cfg = game_config(uneven_pair, '1/8')
        traj = run_game(cfg, FixedInvestor(), RandomMarket(seed=3))
        reports = cycle_diagnostics(traj, sol, lp.beta, uneven_pair, lp.M)
        self.assertTrue(reports)
        starts = [r.start_step for r in reports]
        self.assertEqual(starts, sorted(starts))
        for r in reports:
            self.assertLess(abs(r.gap), 5e-3, r)

    def test_empty_trajectory(self):
        cfg = game_config(uneven_pair, '1/4', T=0, t0=0)
        traj = run_game(cfg, FixedInvestor(), RandomMarket())
        self.assertEqual(cycle_diagnostics(traj, None, [0, 0],
                                           uneven_pair, 0.68), [])


class TestSweeps(unittest.TestCase):

    def test_rate_scale(self):
        self.assertAlmostEqual(rate_scale(0.5, 'linear'), 0.75)
        self.assertAlmostEqual(rate_scale(0.5, 'log'), 0.5 * math.log(2))
        with self.assertRaises(ValidationError):
            rate_scale(0.5, 'cubic')

    def test_coin_value_sweep(self):
        cfg = game_config(coin_pair, '1/4')
        table = sweep_epsilon(cfg, ['1/4', '1/8', '1/16', '1/32'],
                              classic_solution(1.0, 1))
        np.testing.assert_allclose(table.epsilons,
                                   [1 / 4, 1 / 8, 1 / 16, 1 / 32])
        self.assertTrue(table.is_decreasing())
        self.assertGreater(table.observed_order(), 1.5)
        check = fit_bound_constant(
            {r.epsilon: [r.error] for r in table.rows}, 'log')
        self.assertTrue(check.passed)

    def test_smooth_value_sweep(self):
        data = smooth_abs_data()
        cfg = game_config(uneven_pair, '1/4', final=data)
        reference = solve_pde(data, 0.68, 1.0)
        table = sweep_epsilon(cfg, ['1/4', '1/8', '1/16'], reference,
                              start=RegretPoint())
        check = fit_bound_constant(
            {r.epsilon: [r.error] for r in table.rows}, 'linear', slack=2.0)
        self.assertTrue(check.passed, check.results)

    def test_simulate_needs_policies(self):
        cfg = game_config(coin_pair, '1/4')
        with self.assertRaises(ValidationError):
            sweep_epsilon(cfg, ['1/4'], classic_solution(1.0, 1),
                          mode='simulate')
        with self.assertRaises(ValidationError):
            sweep_epsilon(cfg, ['1/4'], classic_solution(1.0, 1),
                          mode='stochastic')

    def test_fit_bound_constant(self):
        check = fit_bound_constant({0.25: [0.1, -0.3], 0.125: [0.05]},
                                   'linear')
        self.assertAlmostEqual(check.C_hat, 0.3 / (1.25 * 0.25))
        self.assertTrue(check.passed)
        self.assertEqual([r[0] for r in check.results], [0.25, 0.125])
        failing = fit_bound_constant({0.25: [0.1], 0.125: [0.2]}, 'linear')
        self.assertFalse(failing.passed)


if __name__ == '__main__':
    unittest.main()
