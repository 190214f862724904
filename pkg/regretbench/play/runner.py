from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from regretbench.config import logger
from regretbench.errors import PolicyError, RegretBenchError, ValidationError
from regretbench.game.setup import RegretPoint, Step, advance
from regretbench.graph.debruijn import DeBruijnGraph
from regretbench.graph.walks import decompose_walk, extend_to_closed_walk
from regretbench.play.policies import ScriptedMarket
from regretbench.utils import write_csv

TRAJECTORY_FIELDS = ['step', 't', 'm', 'xi', 'eta', 'f', 'b', 'clamped_flag']


@dataclass(eq=False)
class Trajectory:
    steps: list
    m: int
    point: RegretPoint
    final_regret: float
    epsilon: Fraction
    investor: str
    market: str
    seed: object = None
    regrets: list = field(default_factory=list)

    @property
    def N(self):
        return len(self.steps)

    @property
    def states(self):
        """The realized state walk, final state included"""
        return [s.m for s in self.steps] + [self.m]

    @property
    def clamp_count(self):
        return sum(1 for s in self.steps if s.clamped)

    def rows(self):
        for s in self.steps:
            yield {'step': s.k, 't': s.t, 'm': s.m, 'xi': s.xi, 'eta': s.eta,
                   'f': s.f, 'b': s.b, 'clamped_flag': int(s.clamped)}

    def to_csv(self, path):
        return write_csv(path, TRAJECTORY_FIELDS, self.rows())

    def to_json(self):
        return {'epsilon': str(self.epsilon), 'N': self.N,
                'investor': self.investor, 'market': self.market,
                'seed': self.seed, 'final_state': self.m,
                'xi': self.point.xi, 'eta': self.point.eta,
                'final_regret': self.final_regret,
                'clamp_events': self.clamp_count}


def run_game(cfg, investor, market, m=0, start=None, seed=None):
    """Play the scaled game from (m, start) to the final time.

    The investor commits its bid before the market moves. Errors raised by
    a policy come back as PolicyError carrying the step index.

    :param cfg: GameConfig
    :param investor: Investor policy
    :param market: Market policy
    """
    e, eps = cfg.experts, cfg.eps
    start = start or RegretPoint()
    xi, eta = start.xi, start.eta
    x1, x2 = start.x1, start.x2
    steps, regrets = [], [(x1, x2)]
    for k in range(cfg.N):
        t = cfg.time(k)
        try:
            f, clamped = investor.decide(t, m, xi, eta, eps)
            b = market.move(t, m, xi, eta, f, eps)
        except RegretBenchError as err:
            raise PolicyError(str(err), k) from err
        if not -1 <= f <= 1:
            raise PolicyError(f"bid {f} outside [-1, 1]", k)
        if b not in (1, -1):
            raise PolicyError(f"market move {b} is not +-1", k)
        steps.append(Step(k, t, m, xi, eta, f, b, clamped))
        x1 += eps * b * (e.q[m] - f)
        x2 += eps * b * (e.r[m] - f)
        regrets.append((x1, x2))
        m, xi, eta = advance(e, eps, m, xi, eta, f, b)
    point = RegretPoint(xi, eta)
    final_regret = float(cfg.final.value(xi, eta))
    logger.debug(f"game {investor.name} vs {market.name}, N={cfg.N}: "
                 f"final regret {final_regret}")
    return Trajectory(steps, m, point, final_regret, cfg.epsilon,
                      investor.name, market.name, seed, regrets)


def worst_case_regret(cfg, investor, m=0, start=None, max_steps=16):
    """Largest final regret any market sequence inflicts on a
    deterministic investor, found by enumerating every b-sequence; the
    worst trajectory is replayed and returned.

    :param max_steps: refuse N above this (2^N leaves)
    """
    if cfg.N > max_steps:
        raise ValidationError(f"exhaustive market needs N <= {max_steps}, "
                              f"got N={cfg.N}")
    e, eps = cfg.experts, cfg.eps
    start = start or RegretPoint()

    def explore(k, m, xi, eta):
        if k == cfg.N:
            return float(cfg.final.value(xi, eta)), ()
        f, _ = investor.decide(cfg.time(k), m, xi, eta, eps)
        best = None
        for b in (1, -1):
            regret, moves = explore(k + 1, *advance(e, eps, m, xi, eta, f, b))
            if best is None or regret > best[0]:
                best = (regret, (b,) + moves)
        return best

    _, moves = explore(0, m, start.xi, start.eta)
    return run_game(cfg, investor, ScriptedMarket(moves), m, start)


def step_increments(trajectory, sol, beta, e):
    """L_k = u_t + (gamma_m - b_k beta_m) D along the played steps"""
    if not trajectory.steps:
        return np.zeros(0)
    t = np.array([s.t for s in trajectory.steps])
    xi = np.array([s.xi for s in trajectory.steps])
    eta = np.array([s.eta for s in trajectory.steps])
    ms = np.array([s.m for s in trajectory.steps])
    bs = np.array([s.b for s in trajectory.steps])
    p = sol.evaluate(t, xi, eta)
    beta = np.asarray(beta, dtype=float)
    return p.u_t + (e.gamma[ms] - bs * beta[ms]) * p.D


@dataclass
class CycleReport:
    label: str
    start_step: int
    length: int
    mean_increment: float
    reference: float

    @property
    def gap(self):
        return self.mean_increment - self.reference


def cycle_diagnostics(trajectory, sol, beta, e, M):
    """Average the per-step increment over every simple-cycle instance of
    the realized walk that lies inside the played steps, next to
    u_t + M D at the instance start.

    :param M: common cycle-average rate of gamma_m - b beta_m
    """
    if not trajectory.steps:
        return []
    g = DeBruijnGraph(e.d)
    L = step_increments(trajectory, sol, beta, e)
    walk = extend_to_closed_walk(trajectory.states, g)
    decomposition = decompose_walk(walk, g)
    reports = []
    for inst in decomposition.instances:
        if max(inst.steps) >= trajectory.N:
            continue
        first = trajectory.steps[inst.start_step]
        p = sol.evaluate(first.t, first.xi, first.eta)
        reports.append(CycleReport(inst.cycle.label, inst.start_step,
                                   inst.cycle.length,
                                   float(np.mean(L[list(inst.steps)])),
                                   float(p.u_t + M * p.D)))
    return sorted(reports, key=lambda r: r.start_step)
