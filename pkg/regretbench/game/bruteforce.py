# Reference value of small games by exhaustive recursion over every market
# sequence and every bid on a finite f-grid. No interpolation is involved, so
# the result bounds the true value from above and approaches it as the
# f-grid is refined.
import numpy as np

from regretbench import config
from regretbench.config import logger
from regretbench.errors import ValidationError
from regretbench.game.setup import RegretPoint
from regretbench.graph.debruijn import next_states
from regretbench.pde.finaldata import SeparableData

MAX_STEPS = 8


def f_grid(resolution=1e-3):
    """Bids -1, -1 + resolution, ..., 1 (both endpoints included)"""
    if not 0 < resolution <= 2:
        raise ValidationError(f"f-grid resolution must lie in (0, 2], got "
                              f"{resolution}")
    return np.linspace(-1.0, 1.0, int(round(2.0 / resolution)) + 1)


def _separable_tree(cfg, bids, k, m, xi):
    """V(k, m, xi) with the eta part c eta factored out"""
    final = cfg.final
    if k == cfg.N:
        return float(final.phi_bar(np.asarray(xi)))
    e, eps, ce = cfg.experts, cfg.eps, cfg.final.c * cfg.eps
    m_plus, m_minus = next_states(m, e.d)
    a_plus = _separable_tree(cfg, bids, k + 1, m_plus, xi + eps * e.spread(m))
    a_minus = _separable_tree(cfg, bids, k + 1, m_minus,
                              xi - eps * e.spread(m))
    s = ce * e.drift(m)
    return float(np.min(np.maximum(a_plus + s - 2 * ce * bids,
                                   a_minus - s + 2 * ce * bids)))


def _general_tree(cfg, bids, k, m, xi, eta):
    """u(k, m, xi, .) at every entry of the eta array"""
    if k == cfg.N:
        return cfg.final.value(np.full(eta.shape, xi), eta)
    e, eps = cfg.experts, cfg.eps
    m_plus, m_minus = next_states(m, e.d)
    shift = eps * (e.drift(m) - 2 * bids)
    grid = (eta.size, bids.size)
    up = _general_tree(cfg, bids, k + 1, m_plus, xi + eps * e.spread(m),
                       (eta[:, None] + shift[None, :]).ravel()).reshape(grid)
    down = _general_tree(cfg, bids, k + 1, m_minus, xi - eps * e.spread(m),
                         (eta[:, None] - shift[None, :]).ravel()).reshape(grid)
    return np.min(np.maximum(up, down), axis=1)


def brute_force_value(cfg, m=0, start=None, resolution=1e-3, bids=None):
    """Exhaustive value of the scaled game for N <= 8.

    Separable data only needs the tree of market sequences (the eta part
    factors out of the min-max); other data carries the eta of every bid
    history, which is only feasible for coarse bid grids.

    :param cfg: GameConfig
    :param m: starting state
    :param start: starting RegretPoint
    :param resolution: f-grid spacing
    :param bids: explicit array of allowed bids, overrides resolution
    """
    if cfg.N > MAX_STEPS:
        raise ValidationError(f"brute force is limited to N <= {MAX_STEPS}, "
                              f"got N={cfg.N}")
    start = start or RegretPoint()
    bids = f_grid(resolution) if bids is None else np.asarray(bids,
                                                              dtype=float)
    if isinstance(cfg.final, SeparableData):
        v = cfg.final.c * start.eta + _separable_tree(cfg, bids, 0, m,
                                                      start.xi)
    else:
        cost = (2 * bids.size) ** cfg.N
        if cost > config.brute_force_budget:
            raise ValidationError(f"brute force over {bids.size} bids and "
                                  f"N={cfg.N} needs ~{cost:.2e} evaluations; "
                                  f"use a coarser f-grid")
        v = float(_general_tree(cfg, bids, 0, m, start.xi,
                                np.array([start.eta]))[0])
    logger.debug(f"brute force value N={cfg.N}, {bids.size} bids: {v}")
    return v
