# Convergence in eps of exact values and simulated regrets towards the PDE
# value, and the empirical form of the O(eps) bounds.
import math
from dataclasses import dataclass, field

import numpy as np

from regretbench import config
from regretbench.config import logger
from regretbench.errors import ValidationError
from regretbench.game.dpp import dpp_value_general, dpp_value_separable
from regretbench.game.setup import RegretPoint
from regretbench.pde.finaldata import SeparableData
from regretbench.play.runner import run_game
from regretbench.utils import parallel_map, parse_fraction, write_csv

SWEEP_FIELDS = ['epsilon', 'N', 'value', 'reference', 'error',
                'error_over_eps', 'error_over_eps_log']

RATES = ('linear', 'log')


def rate_scale(eps, rate, T=1.0, t0=0.0):
    """((T - t0) + eps) eps for 'linear', eps log(1/eps) for 'log'"""
    if rate == 'linear':
        return ((T - t0) + eps) * eps
    if rate == 'log':
        return eps * math.log(1 / eps)
    raise ValidationError(f"rate must be one of {RATES}, got {rate}")


@dataclass
class ConvergenceRow:
    epsilon: float
    N: int
    value: float
    reference: float

    @property
    def error(self):
        return abs(self.value - self.reference)

    @property
    def error_over_eps(self):
        return self.error / self.epsilon

    @property
    def error_over_eps_log(self):
        return self.error / (self.epsilon * math.log(1 / self.epsilon))

    def to_dict(self):
        return {name: getattr(self, name) for name in SWEEP_FIELDS}


@dataclass
class ConvergenceTable:
    rows: list = field(default_factory=list)

    @property
    def epsilons(self):
        return np.array([r.epsilon for r in self.rows])

    @property
    def errors(self):
        return np.array([r.error for r in self.rows])

    def is_decreasing(self):
        """Error column decreasing as eps shrinks (rows sorted by eps,
        coarsest first)"""
        return bool(np.all(np.diff(self.errors) < 0))

    def observed_order(self):
        """Slope of log(error) against log(eps)"""
        slope, _ = np.polyfit(np.log(self.epsilons), np.log(self.errors), 1)
        return float(slope)

    def to_csv(self, path):
        return write_csv(path, SWEEP_FIELDS, (r.to_dict() for r in self.rows))


@dataclass
class BoundCheck:
    """Deviations at each eps tested against slack * C_hat * scale(eps)"""
    C_hat: float
    rate: str
    slack: float
    results: list = field(default_factory=list)

    @property
    def passed(self):
        return all(ok for _, _, _, ok in self.results)


def fit_bound_constant(deviations, rate, T=1.0, t0=0.0, slack=None):
    """Fit C_hat on the coarsest eps and test every eps against it.

    :param deviations: dict eps -> deviations that must stay below the
        bound (e.g. regret - u for the investor's guarantee)
    :param rate: 'linear' or 'log'
    :returns: BoundCheck
    """
    slack = slack or config.bound_slack
    coarsest = max(deviations)
    scale = rate_scale(coarsest, rate, T, t0)
    C_hat = float(np.max(np.abs(deviations[coarsest]))) / scale
    check = BoundCheck(C_hat, rate, slack)
    for eps in sorted(deviations, reverse=True):
        worst = float(np.max(deviations[eps]))
        bound = slack * C_hat * rate_scale(eps, rate, T, t0)
        check.results.append((eps, worst, bound, worst <= bound))
    logger.info(f"bound check ({rate}): C_hat={C_hat}, passed="
                f"{check.passed}")
    return check


def sweep_epsilon(cfg, epsilons, reference, m=0, start=None, mode='value',
                  policies=None, threads=1):
    """Value or simulated regret at each eps next to the PDE value.

    :param cfg: template GameConfig; its epsilon is replaced
    :param epsilons: eps values (strings or Fractions) giving integer N
    :param reference: PdeSolution of the limiting problem
    :param mode: 'value' (exact backward induction) or 'simulate'
    :param policies: for 'simulate', callable eps -> (investor, market)
    """
    start = start or RegretPoint()
    configs = [cfg.with_epsilon(parse_fraction(eps)) for eps in epsilons]
    if mode == 'simulate' and policies is None:
        raise ValidationError("simulation sweeps need a policy factory")
    u = float(reference.value(float(cfg.t0), start.xi, start.eta))

    def run(c):
        if mode == 'value':
            if isinstance(c.final, SeparableData):
                v = dpp_value_separable(c, start).value(m, start)
            else:
                v = dpp_value_general(c, start).value(m, start)
        elif mode == 'simulate':
            investor, market = policies(c.epsilon)
            v = run_game(c, investor, market, m, start).final_regret
        else:
            raise ValidationError(f"unknown sweep mode {mode}")
        return ConvergenceRow(c.eps, c.N, float(v), u)

    rows = sorted(parallel_map(run, configs, threads),
                  key=lambda r: -r.epsilon)
    for r in rows:
        logger.info(f"eps={r.epsilon}: N={r.N}, value={r.value}, "
                    f"error={r.error}")
    return ConvergenceTable(rows)
