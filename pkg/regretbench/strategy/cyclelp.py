# The investor's and the market's linear programs over the simple cycles.
#
# Row i of A encodes cycle s_i: A[i, m] = b_{i,m} (+1 when the cycle leaves
# m by the + edge, -1 by the - edge, 0 when m is not on the cycle) and
# A[i, 2^d] = -|s_i|; g[i] = -sum of gamma over the cycle. With x = (-beta, M)
# the investor needs A x <= g and minimizes M; the market needs A x >= g and
# maximizes M. Row i reads: the cycle average of gamma_m - b_{i,m} beta_m is
# at most (investor) / at least (market) M.
#
# Both programs are solved through their cycle-weight form
#     optimize  sum_i G_i y_i   s.t.  sum_i |s_i| y_i = 1,
#                                     sum_i b_{i,m} y_i = 0 for every m,
#                                     y >= 0,
# (G_i = -g_i; max for the investor, min for the market). The simplex
# multipliers of that form are exactly (M, beta).
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from regretbench.config import logger
from regretbench.errors import ValidationError
from regretbench.graph.walks import euler_cycle_usage
from regretbench.strategy.simplex import SimplexSolver, SimplexStatus


class Side(str, Enum):
    INVESTOR = 'investor'
    MARKET = 'market'


class LpStatus(str, Enum):
    OPTIMAL = 'optimal'
    INFEASIBLE = 'infeasible'
    UNBOUNDED = 'unbounded'


@dataclass(frozen=True, eq=False)
class CycleLp:
    A: np.ndarray
    g: np.ndarray
    cycles: tuple
    side: Side
    d: int

    @property
    def state_count(self):
        return 2 ** self.d

    @property
    def lengths(self):
        return -self.A[:, self.state_count]

    @property
    def cycle_sums(self):
        """G_i: the sum of gamma over cycle i"""
        return -self.g

    @property
    def cycle_averages(self):
        return self.cycle_sums / self.lengths

    def row_index(self, cycle):
        return self.cycles.index(cycle)

    def with_side(self, side):
        return CycleLp(self.A, self.g, self.cycles, Side(side), self.d)


@dataclass(eq=False)
class LpSolution:
    beta: np.ndarray
    M: float
    status: LpStatus
    side: str
    optimal_value: float = None
    weights: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.optimal_value is None:
            self.optimal_value = self.M


@dataclass(eq=False)
class MixedCycleStrategy:
    p: np.ndarray
    cycles: tuple
    value: float

    def cancellation(self):
        """sum_i p_i b_{i,m} / |s_i| for every state m"""
        n = 2 ** self.cycles[0].d
        total = np.zeros(n)
        for p_i, c in zip(self.p, self.cycles):
            for v, b in zip(c.vertices, c.signs):
                total[v] += p_i * b / c.length
        return total


@dataclass(eq=False)
class IndifferenceReport:
    residuals: np.ndarray
    max_abs: float
    tol: float
    passed: bool


def build_cycle_lp(gamma, cycles, side):
    """Constraint system (A, g) for a gamma vector.

    :param gamma: per-state gamma values, length 2^d
    :param cycles: complete simple-cycle inventory for d
    :param side: 'investor' or 'market'
    """
    gamma = np.asarray(gamma, dtype=float)
    cycles = tuple(cycles)
    if not cycles:
        raise ValidationError("the cycle inventory is empty")
    d = cycles[0].d
    n = 2 ** d
    if gamma.shape != (n,):
        raise ValidationError(f"gamma has {gamma.size} entries, cycles are "
                              f"for d={d}")
    A = np.zeros((len(cycles), n + 1))
    g = np.zeros(len(cycles))
    for i, c in enumerate(cycles):
        A[i, list(c.vertices)] = c.signs
        A[i, n] = -c.length
        g[i] = -gamma[list(c.vertices)].sum()
    return CycleLp(A, g, cycles, Side(side), d)


def build_lp(e, cycles, side):
    return build_cycle_lp(e.gamma, cycles, side)


def _solve_weights(lp):
    n = lp.state_count
    E = np.vstack((lp.lengths, lp.A[:, :n].T))
    rhs = np.zeros(n + 1)
    rhs[0] = 1.0
    solver = SimplexSolver(E, rhs, lp.cycle_sums,
                           maximize=lp.side is Side.INVESTOR)
    return solver.solve()


def solve(lp):
    """Optimal (beta, M) for the side the LP was built for"""
    result = _solve_weights(lp)
    n = lp.state_count
    if result.status is not SimplexStatus.OPTIMAL:
        # an infeasible weight problem means an unbounded (beta, M) problem
        status = {SimplexStatus.INFEASIBLE: LpStatus.UNBOUNDED,
                  SimplexStatus.UNBOUNDED: LpStatus.INFEASIBLE}[result.status]
        logger.warning(f"{lp.side.value} LP is {status.value}")
        return LpSolution(np.full(n, np.nan), np.nan, status, lp.side.value)
    M = float(result.multipliers[0])
    beta = np.asarray(result.multipliers[1:], dtype=float)
    logger.debug(f"{lp.side.value} LP for d={lp.d}: M={M} after "
                 f"{result.iterations} pivots")
    return LpSolution(beta, M, LpStatus.OPTIMAL, lp.side.value,
                      optimal_value=result.objective, weights=result.x)


def dual_mixed_strategy(lp):
    """Mixed strategy over cycles that makes the market insensitive to beta.

    :param lp: an investor-side CycleLp
    """
    if lp.side is not Side.INVESTOR:
        raise ValidationError("the mixed-strategy characterization is for "
                              "the investor's LP")
    result = _solve_weights(lp)
    p = result.x * lp.lengths
    p = p / p.sum()
    value = float(p @ lp.cycle_averages)
    return MixedCycleStrategy(p, lp.cycles, value)


def cycle_averages_with_beta(beta, lp):
    """Per cycle: the cycle average of gamma_m - b_{i,m} beta_m"""
    n = lp.state_count
    return (lp.cycle_sums - lp.A[:, :n] @ np.asarray(beta)) / lp.lengths


def cycle_residuals(sol, lp):
    """LHS - M per cycle (<= 0 on the investor side, >= 0 on the market's)"""
    return cycle_averages_with_beta(sol.beta, lp) - sol.M


def is_feasible(sol, lp, tol=1e-9):
    residuals = cycle_residuals(sol, lp)
    if lp.side is Side.INVESTOR:
        return bool(np.all(residuals <= tol))
    return bool(np.all(residuals >= -tol))


def verify_indifference(sol, lp, tol=1e-9):
    residuals = cycle_residuals(sol, lp)
    max_abs = float(np.max(np.abs(residuals)))
    return IndifferenceReport(residuals, max_abs, tol, max_abs <= tol)


def zero_beta_bounds(lp):
    """Constants reached with beta = 0: (investor upper, market lower), the
    largest and the smallest cycle average of gamma."""
    averages = lp.cycle_averages
    return float(averages.max()), float(averages.min())


def euler_row_sum(lp, g):
    """Sum of the rows of A along the Eulerian-circuit factorization; the
    beta columns cancel."""
    total = np.zeros(lp.A.shape[1])
    for cycle, count in euler_cycle_usage(g).items():
        total += count * lp.A[lp.row_index(cycle)]
    return total


def diffusion_constants(e, cycles):
    """(investor optimum, market optimum) for an expert pair"""
    upper = solve(build_lp(e, cycles, Side.INVESTOR))
    lower = solve(build_lp(e, cycles, Side.MARKET))
    gap = upper.M - lower.M
    if gap > 1e-8:
        logger.warning(f"d={e.d}: investor and market optima differ by "
                       f"{gap:.3e}")
    return upper.M, lower.M


def lp_to_table(lp):
    """Plain-text listing: cycle label, coefficients of A, right-hand side"""
    n = lp.state_count
    header = (['cycle'] + [f'beta{m}' for m in range(n)] + ['M', 'rhs'])
    lines = ['\t'.join(header)]
    for c, row, rhs in zip(lp.cycles, lp.A, lp.g):
        lines.append('\t'.join([c.label]
                               + [f'{int(v):d}' for v in row]
                               + [repr(float(rhs))]))
    return '\n'.join(lines) + '\n'


def solution_to_json(sol):
    return {'beta': [float(v) for v in sol.beta],
            'M': float(sol.M),
            'optimal_value': float(sol.optimal_value),
            'status': LpStatus(sol.status).value,
            'side': sol.side}
