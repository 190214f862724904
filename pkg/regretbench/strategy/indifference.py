# Explicit beta making every simple cycle accumulate regret at the same
# rate M = 2^-d sum(gamma), known for d <= 4. In every case
# beta[m] == beta[m + 2^(d-1)]: beta only depends on the d-1 most recent
# moves, so only the first half is written out.
import numpy as np

from regretbench.errors import UnsupportedDepth
from regretbench.strategy.cyclelp import LpSolution, LpStatus


def _half_d1(g, M):
    return [(g[1] - g[0]) / 2]


def _half_d2(g, M):
    return [M - g[0],
            g[3] - M]


def _half_d3(g, M):
    return [M - g[0],
            -M + (-g[2] + g[3] + g[6] + g[7]) / 2,
            M - (g[0] + g[1] + g[4] - g[5]) / 2,
            g[7] - M]


def _half_d4(g, M):
    return [M - g[0],
            -M + (-2*g[2] + 2*g[3] - g[4] - g[5] + g[6] + g[7]
                  + g[12] + g[13] + g[14] + g[15]) / 4,
            M - (g[0] + g[1] + g[2] + g[3] + 2*g[4] - 2*g[5]
                 + g[8] + g[9] - g[10] - g[11]) / 4,
            -M + (-2*g[6] + 2*g[7] + 2*g[14] + 2*g[15]) / 4,
            M - (2*g[0] + 2*g[1] + 2*g[8] - 2*g[9]) / 4,
            -M + (-g[4] - g[5] + g[6] + g[7] - 2*g[10] + 2*g[11]
                  + g[12] + g[13] + g[14] + g[15]) / 4,
            M - (g[0] + g[1] + g[2] + g[3] + g[8] + g[9] - g[10] - g[11]
                 + 2*g[12] - 2*g[13]) / 4,
            # last entry: gamma_15, the pattern of every other depth
            g[15] - M]


_HALVES = {1: _half_d1, 2: _half_d2, 3: _half_d3, 4: _half_d4}


def closed_form_beta(gamma):
    """Indifference beta and M for a gamma vector of length 2^d, d <= 4"""
    gamma = np.asarray(gamma, dtype=float)
    d = int(np.log2(gamma.size))
    if d not in _HALVES:
        raise UnsupportedDepth(f"no closed-form indifference solution for "
                               f"d={d}; only d <= 4 is known")
    M = gamma.sum() / gamma.size
    half = _HALVES[d](gamma, M)
    return np.array(half + half), float(M)


def indifference_closed_form(e):
    """Closed-form indifference solution for an expert pair with d <= 4"""
    beta, M = closed_form_beta(e.gamma)
    return LpSolution(beta, M, LpStatus.OPTIMAL, 'closed-form')
