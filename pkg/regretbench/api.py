import os
from dataclasses import dataclass, field

import numpy as np

from regretbench.config import __version__, config_digest, logger
from regretbench.errors import ConfigError, DerivativeUnavailable
from regretbench.experts import ExpertPair, load_experts, random_pair
from regretbench.game.dpp import dpp_value_general, dpp_value_separable
from regretbench.game.setup import RegretPoint, game_config
from regretbench.graph.debruijn import (DeBruijnGraph, cycles_to_json,
                                        enumerate_simple_cycles)
from regretbench.pde.checks import dump_grid
from regretbench.pde.finaldata import (FAMILIES, ClassicData, SeparableData,
                                       final_from_json, load_final)
from regretbench.pde.solutions import classic_solution, solve_pde
from regretbench.play.policies import make_investor, make_market, \
    pde_strategies
from regretbench.play.runner import run_game, worst_case_regret
from regretbench.play.sweep import fit_bound_constant, sweep_epsilon
from regretbench.strategy.cyclelp import (Side, build_lp, cycle_residuals,
                                          diffusion_constants,
                                          solution_to_json, solve,
                                          zero_beta_bounds)
from regretbench.strategy.indifference import indifference_closed_form
from regretbench.utils import (ensure_dir, parallel_map, parse_fraction,
                               parse_fraction_list, utc_timestamp, write_json)

SIDES = {'investor': (Side.INVESTOR,),
         'market': (Side.MARKET,),
         'both': (Side.INVESTOR, Side.MARKET)}


@dataclass
class RunManifest:
    command: str
    config_digest: str
    seeds: dict
    version: str = __version__
    started: str = field(default_factory=utc_timestamp)
    finished: str = None
    outputs: list = field(default_factory=list)

    def to_json(self):
        return {'command': self.command,
                'config_digest': self.config_digest,
                'seeds': self.seeds,
                'version': self.version,
                'started': self.started,
                'finished': self.finished,
                'outputs': list(self.outputs)}


class RegretBenchAPI(object):

    def __init__(self, cfg, out_dir=None, command=None):
        """
        :param cfg: run configuration from config.load_run_config
        :param out_dir: directory receiving CSV/JSON outputs, or None
        :param command: subcommand name recorded in the manifest
        """
        self.cfg = cfg
        self.out_dir = ensure_dir(out_dir)
        self.manifest = RunManifest(command, config_digest(cfg),
                                    {'seed': cfg['seed']})

    def _output(self, name):
        path = os.path.join(self.out_dir, name)
        self.manifest.outputs.append(path)
        return path

    def _emit(self, name, payload):
        if self.out_dir:
            write_json(self._output(name), payload)
        return payload

    def experts(self):
        spec = self.cfg['experts']
        if spec is None:
            logger.info(f"No experts given, drawing a d={self.cfg['d']} "
                        f"pair with seed {self.cfg['seed']}")
            return random_pair(self.cfg['d'], self.cfg['seed'])
        if isinstance(spec, dict):
            return ExpertPair.from_json(spec)
        return load_experts(spec)

    def final_data(self):
        spec = self.cfg['final']
        if isinstance(spec, dict):
            return final_from_json(spec)
        if spec in FAMILIES:
            return FAMILIES[spec]()
        return load_final(spec)

    def _start(self):
        start = self.cfg['start']
        try:
            return int(start['m']), RegretPoint(float(start['xi']),
                                                float(start['eta']))
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"start needs m, xi and eta: {e}") from e

    def _game(self, epsilon=None, t0=None):
        return game_config(self.experts(),
                           epsilon if epsilon is not None
                           else self.cfg['epsilon'],
                           self.cfg['T'],
                           t0 if t0 is not None else self.cfg['t0'],
                           self.final_data())

    def cycles(self, d):
        cycles = enumerate_simple_cycles(DeBruijnGraph(d))
        logger.info(f"d={d}: {len(cycles)} simple cycles")
        return self._emit('cycles.json', cycles_to_json(cycles, d))

    def lp(self, side='both', closed_form=False):
        e = self.experts()
        cycles = enumerate_simple_cycles(DeBruijnGraph(e.d))
        payload = {'experts': e.to_json(), 'cycle_count': len(cycles),
                   'sides': {}}
        for s in SIDES[side]:
            lp = build_lp(e, cycles, s)
            sol = indifference_closed_form(e) if closed_form else solve(lp)
            residuals = cycle_residuals(sol, lp)
            entry = solution_to_json(sol)
            entry['residuals'] = {c.label: float(r)
                                  for c, r in zip(cycles, residuals)}
            entry['max_abs_residual'] = float(np.max(np.abs(residuals)))
            payload['sides'][s.value] = entry
            logger.info(f"{s.value} LP: M={sol.M}")
        upper, lower = zero_beta_bounds(build_lp(e, cycles, Side.INVESTOR))
        payload['zero_beta_bounds'] = {'investor': upper, 'market': lower}
        payload['mean_gamma'] = float(np.mean(e.gamma))
        if side == 'both':
            payload['gap'] = (payload['sides']['investor']['M']
                              - payload['sides']['market']['M'])
        return self._emit('lp.json', payload)

    def pde(self, C, T, probe, t=None):
        """Solve the PDE for the configured final data and probe one point"""
        final = self.final_data()
        T = float(parse_fraction(T))
        t = float(self.cfg['t0']) if t is None else float(t)
        y_grid = self.cfg['y_grid']
        sol = solve_pde(final, float(C), T,
                        order=self.cfg['quadrature_order'],
                        y_grid=None if y_grid is None else np.asarray(y_grid),
                        threads=self.cfg['threads'])
        xi, eta = (float(v) for v in probe)
        payload = {'final': final.name, 'C': float(C), 'T': T, 't': t,
                   'xi': xi, 'eta': eta}
        try:
            p = sol.evaluate(t, xi, eta)
            for name in ('u', 'u_t', 'u_xi', 'u_eta', 'u_xixi', 'u_xieta',
                         'u_etaeta', 'D'):
                payload[name] = float(getattr(p, name))
        except DerivativeUnavailable as err:
            logger.warning(f"derivatives unavailable at t={t}: {err}")
            payload['u'] = float(sol.value(t, xi, eta))
        if self.out_dir:
            t_values = np.linspace(t, T, 5)[:-1]
            axis = np.linspace(-1.0, 1.0, 21)
            dump_grid(sol, self._output('pde_grid.csv'), t_values, axis,
                      axis)
        return self._emit('pde.json', payload)

    def value(self, N=None, general=False):
        """Exact game value by backward induction"""
        t0 = None
        if N is not None:
            eps = parse_fraction(self.cfg['epsilon'])
            t0 = parse_fraction(self.cfg['T']) - int(N) * eps ** 2
        game = self._game(t0=t0)
        m, start = self._start()
        keep = bool(self.cfg['keep_levels']) or self.out_dir is not None
        if isinstance(game.final, SeparableData) and not general:
            table = dpp_value_separable(game, start, keep_levels=keep)
        else:
            table = dpp_value_general(game, start, keep_levels=keep,
                                      threads=self.cfg['threads'])
        v = table.value(m, start)
        logger.info(f"value at eps={game.epsilon}, N={game.N}: {v}")
        if self.out_dir:
            table.to_csv(self._output('value.csv'))
        return self._emit('value.json', {**game.to_json(), 'mode': table.mode,
                                         'm': m, 'xi': start.xi,
                                         'eta': start.eta, 'value': v})

    def simulate(self, investor=None, market=None, markets=None):
        """Play investor against market policies, one game per seed"""
        investor = investor or self.cfg['investor']
        market = market or self.cfg['market']
        markets = int(markets or self.cfg['markets'])
        game = self._game()
        m, start = self._start()
        strategies = pde_strategies(game)
        seeds = [self.cfg['seed'] + i for i in range(markets)]

        def play(seed):
            inv = make_investor(investor, strategies, game.experts,
                                self.cfg['fixed_bid'], seed)
            if market == 'exhaustive':
                traj = worst_case_regret(game, inv, m, start)
                traj.seed = seed
                return traj
            return run_game(game, inv,
                            make_market(market, strategies, game.experts,
                                        seed),
                            m, start, seed)

        trajectories = parallel_map(play, seeds, self.cfg['threads'])
        reference = float(strategies.investor_sol.value(
            float(game.t0), start.xi, start.eta))
        if self.out_dir:
            for traj in trajectories:
                traj.to_csv(self._output(f'trajectory_{traj.seed}.csv'))
        regrets = [traj.final_regret for traj in trajectories]
        logger.info(f"{len(trajectories)} games: regret in "
                    f"[{min(regrets)}, {max(regrets)}], u={reference}")
        self.manifest.seeds['games'] = seeds
        return self._emit('simulate.json', {
            **game.to_json(), 'reference': reference,
            'M_upper': strategies.M_upper, 'M_lower': strategies.M_lower,
            'gamma': strategies.gamma,
            'games': [traj.to_json() for traj in trajectories]})

    def sweep(self, epsilons=None, mode=None):
        """Convergence of values or simulated regrets as eps shrinks"""
        epsilons = parse_fraction_list(epsilons or self.cfg['epsilons'])
        mode = mode or self.cfg['mode']
        game = self._game(epsilon=max(epsilons))
        m, start = self._start()
        cycles = enumerate_simple_cycles(DeBruijnGraph(game.d))
        C_upper, _ = diffusion_constants(game.experts, cycles)
        T = float(game.T)
        if isinstance(game.final, ClassicData):
            reference = classic_solution(C_upper, T)
            rate = 'log'
        else:
            reference = solve_pde(game.final, C_upper, T,
                                  order=self.cfg['quadrature_order'])
            rate = 'linear'

        def policies(eps):
            c = game.with_epsilon(eps)
            strategies = pde_strategies(c, cycles)
            return (make_investor(self.cfg['investor'], strategies,
                                  c.experts, self.cfg['fixed_bid'],
                                  self.cfg['seed']),
                    make_market(self.cfg['market'], strategies, c.experts,
                                self.cfg['seed']))

        table = sweep_epsilon(game, epsilons, reference, m, start, mode,
                              policies if mode == 'simulate' else None,
                              self.cfg['threads'])
        check = fit_bound_constant(
            {r.epsilon: np.array([r.error]) for r in table.rows}, rate,
            T, float(game.t0))
        if self.out_dir:
            table.to_csv(self._output('sweep.csv'))
        payload = {'mode': mode, 'rate': rate, 'C': C_upper,
                   'rows': [r.to_dict() for r in table.rows],
                   'errors_decreasing': table.is_decreasing(),
                   'bound': {'C_hat': check.C_hat, 'slack': check.slack,
                             'passed': check.passed}}
        if len(table.rows) > 1 and np.all(table.errors > 0):
            payload['observed_order'] = table.observed_order()
        return self._emit('sweep.json', payload)

    def write_manifest(self):
        self.manifest.finished = utc_timestamp()
        payload = self.manifest.to_json()
        if self.out_dir:
            write_json(os.path.join(self.out_dir, 'manifest.json'), payload)
        return payload
