# Investor and market policies.
#
# The PDE-guided investor bids f = f* + eps f# with
#     f* = [(q - r) u_xi + (q + r) u_eta] / (2 u_eta)
#     f# = beta_m D / (2 u_eta)
# f* is the average of the experts' bids weighted by u_x1 and u_x2.
# The forcing market answers a bid f with
#     b = -sign(f - f*)     if |f - f*| >= gamma eps
#     b = -sign(X)          otherwise, X = (f - f* - eps f#) / eps
# and b = +1 on ties.
from abc import ABC, abstractmethod
from collections import namedtuple

import numpy as np

from regretbench import config
from regretbench.config import logger
from regretbench.errors import UnboundedEstimate, ValidationError
from regretbench.graph.debruijn import DeBruijnGraph, enumerate_simple_cycles
from regretbench.pde.finaldata import ClassicData
from regretbench.pde.solutions import classic_solution, solve_pde
from regretbench.strategy.cyclelp import LpStatus, Side, build_lp, solve


def leading_bid(point, e, m):
    """f* at a PdePoint for state m"""
    return ((e.spread(m) * point.u_xi + e.drift(m) * point.u_eta)
            / (2 * point.u_eta))


def sharp_correction(point, beta, m):
    """f#, set to 0 where |D| is below the cutoff"""
    D = point.D
    if abs(float(D)) < config.sharp_cutoff:
        return 0.0
    return float(beta[m] * D / (2 * point.u_eta))


def _sign(x):
    return 1 if x >= 0 else -1


class Investor(ABC):
    name = None

    def __init__(self):
        self.clamp_events = 0

    @abstractmethod
    def raw_bid(self, t, m, xi, eta, eps):
        """Bid before clamping"""

    def decide(self, t, m, xi, eta, eps):
        """(f, clamped) with f in [-1, 1]"""
        f = float(self.raw_bid(t, m, xi, eta, eps))
        if not np.isfinite(f):
            raise ValidationError(f"{self.name} investor produced bid {f}")
        if abs(f) > 1:
            self.clamp_events += 1
            logger.warning(f"{self.name} bid {f} at t={t}, m={m} clamped "
                           f"into [-1, 1]")
            return float(np.clip(f, -1.0, 1.0)), True
        return f, False

    def __repr__(self):
        return f"{type(self).__name__}()"


class PdeGuidedInvestor(Investor):
    name = 'pde'

    def __init__(self, sol, beta, experts):
        """
        :param sol: PdeSolution of the investor's (upper) equation
        :param beta: investor LP beta, one entry per state
        :param experts: ExpertPair
        """
        super().__init__()
        self.sol = sol
        self.beta = np.asarray(beta, dtype=float)
        self.experts = experts

    def raw_bid(self, t, m, xi, eta, eps):
        point = self.sol.evaluate(t, xi, eta)
        return (leading_bid(point, self.experts, m)
                + eps * sharp_correction(point, self.beta, m))


class FixedInvestor(Investor):
    name = 'fixed'

    def __init__(self, f=0.0):
        super().__init__()
        self.f = float(f)

    def raw_bid(self, t, m, xi, eta, eps):
        return self.f


class CustomInvestor(Investor):
    name = 'custom'

    def __init__(self, fn):
        """:param fn: callable (t, m, xi, eta, eps) -> bid"""
        super().__init__()
        self.fn = fn

    def raw_bid(self, t, m, xi, eta, eps):
        return self.fn(t, m, xi, eta, eps)


class PerturbedInvestor(Investor):
    """base bid + eps * scale * U, U uniform on [-1, 1]"""
    name = 'perturbed'

    def __init__(self, base, scale=1.0, seed=0):
        super().__init__()
        self.base = base
        self.scale = float(scale)
        self.seed = seed
        self.rng = np.random.default_rng(seed)

    def raw_bid(self, t, m, xi, eta, eps):
        f, _ = self.base.decide(t, m, xi, eta, eps)
        return f + eps * self.scale * self.rng.uniform(-1.0, 1.0)


class Market(ABC):
    name = None

    @abstractmethod
    def move(self, t, m, xi, eta, f, eps):
        """b in {-1, +1} answering the bid f"""

    def __repr__(self):
        return f"{type(self).__name__}()"


class ForcingMarket(Market):
    name = 'forcing'

    def __init__(self, sol, beta, experts, gamma):
        """
        :param sol: PdeSolution of the market's (lower) equation
        :param beta: market LP beta
        :param gamma: threshold constant, see compute_gamma
        """
        self.sol = sol
        self.beta = np.asarray(beta, dtype=float)
        self.experts = experts
        self.gamma = float(gamma)
        self.case_counts = {1: 0, 2: 0}

    def move(self, t, m, xi, eta, f, eps):
        point = self.sol.evaluate(t, xi, eta)
        gap = f - float(leading_bid(point, self.experts, m))
        if abs(gap) >= self.gamma * eps:
            self.case_counts[1] += 1
            return -_sign(gap) if gap != 0 else 1
        self.case_counts[2] += 1
        X = (gap - eps * sharp_correction(point, self.beta, m)) / eps
        return -_sign(X) if X != 0 else 1


class RandomMarket(Market):
    name = 'random'

    def __init__(self, seed=0):
        self.seed = seed
        self.rng = np.random.default_rng(seed)

    def move(self, t, m, xi, eta, f, eps):
        return 1 if self.rng.random() < 0.5 else -1


class ScriptedMarket(Market):
    """Plays a fixed sequence of moves"""
    name = 'scripted'

    def __init__(self, moves):
        self.moves = list(moves)
        self._k = 0

    def move(self, t, m, xi, eta, f, eps):
        b = self.moves[self._k]
        self._k += 1
        return b


def investor_bid(policy, t, m, xi, eta, eps):
    return policy.decide(t, m, xi, eta, eps)[0]


def market_move(policy, t, m, xi, eta, f, eps):
    return policy.move(t, m, xi, eta, f, eps)


def increment_bound(e):
    """max over states and bids of |(q - r, q + r - 2f)|"""
    return float(np.max(np.sqrt(e.spreads ** 2
                                + (np.abs(e.drifts) + 2) ** 2)))


def compute_gamma(sol, e, beta, M, points):
    """Threshold constant of the forcing market from sampled derivatives.

    Two bounds are sampled and the larger one, times a safety factor, is
    returned:
        max_m (|gamma_m - M| + |beta_m|) |D| / u_eta
        max_{|v| <= V} |u_t + <D^2u v, v> / 2| / u_eta
    with V the largest state increment.

    :param points: array of rows (t, xi, eta)
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    p = sol.evaluate(points[:, 0], points[:, 1], points[:, 2])
    spread_of_rates = float(np.max(np.abs(e.gamma - M)
                                   + np.abs(np.asarray(beta))))
    first = spread_of_rates * np.abs(p.D) / p.u_eta
    V = increment_bound(e)
    eigen = np.linalg.eigvalsh(p.hessian)
    high = p.u_t + 0.5 * V ** 2 * np.maximum(eigen[..., -1], 0.0)
    low = p.u_t + 0.5 * V ** 2 * np.minimum(eigen[..., 0], 0.0)
    second = np.maximum(np.abs(high), np.abs(low)) / p.u_eta
    gamma = config.gamma_safety_factor * float(max(np.max(first),
                                                   np.max(second)))
    if not np.isfinite(gamma):
        raise UnboundedEstimate("sampled derivative bounds are not finite; "
                                "smooth the final data first")
    logger.debug(f"gamma bounds: {np.max(first)}, {np.max(second)}")
    return gamma


def sample_points(cfg, start=None, size=9):
    """Rows (t, xi, eta) covering the region play typically visits"""
    t = np.linspace(cfg.time(0), cfg.time(max(cfg.N - 1, 0)), size)
    width = 3 * np.sqrt(float(cfg.T - cfg.t0)) * float(
        np.max(np.abs(cfg.experts.spreads))) + cfg.eps
    xi0 = 0.0 if start is None else start.xi
    eta0 = 0.0 if start is None else start.eta
    xi = xi0 + np.linspace(-width, width, size)
    eta = eta0 + np.linspace(-width, width, 3)
    grid = np.meshgrid(t, xi, eta, indexing='ij')
    return np.stack([a.ravel() for a in grid], axis=-1)


Strategies = namedtuple('Strategies', [
    'investor_sol', 'market_sol', 'investor_beta', 'market_beta',
    'M_upper', 'M_lower', 'gamma'])


def pde_strategies(cfg, cycles=None, smoothing=2.0):
    """Solutions, beta vectors and threshold behind the PDE-guided investor
    and the forcing market of one game.

    Classic data is replaced by its smoothed solution u(t - delta) with
    delta = smoothing * eps^2, shifted below the classic one for the market.

    :param cfg: GameConfig
    :param cycles: simple-cycle inventory for cfg.d (enumerated when None)
    """
    e = cfg.experts
    if cycles is None:
        cycles = enumerate_simple_cycles(DeBruijnGraph(e.d))
    upper = solve(build_lp(e, cycles, Side.INVESTOR))
    lower = solve(build_lp(e, cycles, Side.MARKET))
    if upper.status is not LpStatus.OPTIMAL or \
            lower.status is not LpStatus.OPTIMAL:
        raise UnboundedEstimate(f"cycle LPs not solved: {upper.status}, "
                                f"{lower.status}")
    T = float(cfg.T)
    if isinstance(cfg.final, ClassicData):
        delta = smoothing * cfg.eps ** 2
        investor_sol = classic_solution(upper.M, T, delta, 'above')
        market_sol = classic_solution(lower.M, T, delta, 'below')
    else:
        investor_sol = solve_pde(cfg.final, upper.M, T)
        market_sol = solve_pde(cfg.final, lower.M, T)
    gamma = compute_gamma(market_sol, e, lower.beta, lower.M,
                          sample_points(cfg))
    logger.info(f"strategies for d={e.d}, eps={cfg.epsilon}: "
                f"M in [{lower.M}, {upper.M}], gamma={gamma}")
    return Strategies(investor_sol, market_sol, upper.beta, lower.beta,
                      upper.M, lower.M, gamma)


def make_investor(kind, strategies, experts, fixed_bid=0.0, seed=0):
    if kind == 'pde':
        return PdeGuidedInvestor(strategies.investor_sol,
                                 strategies.investor_beta, experts)
    if kind == 'fixed':
        return FixedInvestor(fixed_bid)
    if kind == 'perturbed':
        return PerturbedInvestor(
            PdeGuidedInvestor(strategies.investor_sol,
                              strategies.investor_beta, experts),
            seed=seed)
    raise ValidationError(f"unknown investor policy {kind}")


def make_market(kind, strategies, experts, seed=0):
    if kind == 'forcing':
        return ForcingMarket(strategies.market_sol, strategies.market_beta,
                             experts, strategies.gamma)
    if kind == 'random':
        return RandomMarket(seed)
    raise ValidationError(f"unknown market policy {kind}")
