# Exact value of the scaled game by backward induction:
#     u(k, m, xi, eta) = min_{|f|<=1} max_{b=+-1}
#                        u(k+1, m_b, xi + eps b (q-r), eta + eps b (q+r-2f))
# with u(N) = phi.
#
# For separable data phi = c eta + phi_bar(xi) the eta part factors out,
# u = c eta + V(k, m, xi), and the two branches are affine in f:
#     b = +1:  a_plus  + s - 2 c eps f
#     b = -1:  a_minus - s + 2 c eps f,        s = c eps (q + r)
# so the min over f sits at their crossing, clipped to [-1, 1].
import math
from collections import namedtuple
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import minimize_scalar

from regretbench import config
from regretbench.config import logger
from regretbench.errors import GridOutOfRange, ValidationError
from regretbench.game.setup import RegretPoint, Step, advance
from regretbench.graph.debruijn import DeBruijnGraph
from regretbench.pde.finaldata import SeparableData
from regretbench.utils import parallel_map, write_csv

OptimalPlay = namedtuple('OptimalPlay', ['steps', 'm', 'point', 'regret'])


def lattice_step(increments, tol=1e-14, max_denominator=10 ** 6):
    """Largest h with every increment an integer multiple of h, or None
    when the increments are not commensurate"""
    fractions = []
    for v in increments:
        if v == 0:
            continue
        fr = Fraction(float(v)).limit_denominator(max_denominator)
        if abs(float(fr) - v) > tol * max(1.0, abs(v)):
            return None
        fractions.append(abs(fr))
    if not fractions:
        return None
    denominator = math.lcm(*(fr.denominator for fr in fractions))
    numerator = math.gcd(*(int(fr * denominator) for fr in fractions))
    return float(Fraction(numerator, denominator))


def _crossing(a_plus, a_minus, s, ce):
    """min over |f| <= 1 of the max of the two affine branches, and the
    minimizing f"""
    f = np.clip((a_plus - a_minus + 2 * s) / (4 * ce), -1.0, 1.0)
    return np.maximum(a_plus + s - 2 * ce * f, a_minus - s + 2 * ce * f), f


def golden_section_min(F, shape, lo=-1.0, hi=1.0, tol=None):
    """Minimize F elementwise over [lo, hi] for an array of unimodal
    problems; endpoints are compared at the end.

    :param F: vectorized function of an array f of the given shape
    """
    tol = tol or config.golden_section_tol
    inv = (math.sqrt(5) - 1) / 2
    a, b = np.full(shape, lo), np.full(shape, hi)
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = F(c), F(d)
    while np.max(b - a) > tol:
        left = fc <= fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        x = np.where(left, b - inv * (b - a), a + inv * (b - a))
        fx = F(x)
        c, d = np.where(left, x, d), np.where(left, c, x)
        fc, fd = np.where(left, fx, fd), np.where(left, fc, fx)
    candidates = [0.5 * (a + b), np.full(shape, lo), np.full(shape, hi)]
    values = np.stack([F(x) for x in candidates])
    best = np.nanargmin(np.where(np.isnan(values), np.inf, values), axis=0)
    pick = np.take_along_axis(values, best[None], axis=0)[0]
    f = np.choose(best, candidates)
    return pick, f


@dataclass(eq=False)
class GameValue:
    """Value tables V(k, m, .) of the scaled game.

    For separable data the tables hold V over a xi-grid and the value is
    slope * eta + V; otherwise they hold u over a (xi, eta) grid.
    interpolation_bound is the declared error of reading the tables between
    nodes, summed over the levels; it is 0 on an exact lattice.
    """
    cfg: object
    xi_grid: np.ndarray
    levels: dict
    mode: str
    slope: float = None
    eta_grid: np.ndarray = None
    step: float = None
    start: RegretPoint = field(default_factory=RegretPoint)
    interpolation_bound: float = 0.0

    @property
    def N(self):
        return self.cfg.N

    def _table(self, k, m):
        if k not in self.levels:
            raise ValidationError(f"level {k} was not kept; rerun with "
                                  f"keep_levels")
        return self.levels[k][m]

    def _row_value(self, row, xi):
        if self.step is not None:
            j = (xi - self.xi_grid[0]) / self.step
            i = int(round(j))
            if abs(j - i) < 1e-7 and 0 <= i < row.size:
                return float(row[i])
        mask = np.isfinite(row)
        if np.count_nonzero(mask) < 2:
            return float(row[mask][0]) if np.isclose(
                self.xi_grid[mask][0], xi) else np.nan
        return float(PchipInterpolator(self.xi_grid[mask], row[mask],
                                       extrapolate=False)(xi))

    def _plane_value(self, table, xi, eta):
        finite = np.isfinite(table)
        rows = np.flatnonzero(finite.any(axis=1))
        cols = np.flatnonzero(finite.any(axis=0))
        if rows.size < 2 or cols.size < 2:
            return np.nan
        xs = self.xi_grid[rows[0]:rows[-1] + 1]
        ys = self.eta_grid[cols[0]:cols[-1] + 1]
        if not (xs[0] <= xi <= xs[-1] and ys[0] <= eta <= ys[-1]):
            return np.nan
        block = table[rows[0]:rows[-1] + 1, cols[0]:cols[-1] + 1]
        column = PchipInterpolator(ys, block, axis=1)(eta)
        return float(PchipInterpolator(xs, column)(xi))

    def at(self, k, m, xi, eta=0.0):
        """Interpolated value u(k, m, xi, eta)"""
        table = self._table(k, m)
        if self.eta_grid is None:
            v = self.slope * eta + self._row_value(table, xi)
        else:
            v = self._plane_value(table, xi, eta)
        if not np.isfinite(v):
            raise GridOutOfRange(f"({xi}, {eta}) at level {k} is outside "
                                 f"the computed region")
        return v

    def value(self, m=0, point=None):
        point = point or self.start
        return self.at(0, m, point.xi, point.eta)

    def rows(self):
        for k in sorted(self.levels):
            for m, table in enumerate(self.levels[k]):
                if self.eta_grid is None:
                    for xi, v in zip(self.xi_grid, table):
                        if np.isfinite(v):
                            yield {'k': k, 'm': m, 'xi': float(xi),
                                   'V': float(v)}
                else:
                    for i, xi in enumerate(self.xi_grid):
                        for j, eta in enumerate(self.eta_grid):
                            if np.isfinite(table[i, j]):
                                yield {'k': k, 'm': m, 'xi': float(xi),
                                       'eta': float(eta),
                                       'V': float(table[i, j])}

    def to_csv(self, path):
        fields = (['k', 'm', 'xi', 'V'] if self.eta_grid is None
                  else ['k', 'm', 'xi', 'eta', 'V'])
        return write_csv(path, fields, self.rows())


def _transitions(d):
    edges = DeBruijnGraph(d).edges
    return (np.array([p for p, _ in edges]),
            np.array([m for _, m in edges]))


def _centered_grid(center, radius, h):
    J = int(math.ceil(radius / h))
    return center + h * np.arange(-J, J + 1)


def _check_covers(grid, center, reach, name):
    if grid[0] > center - reach or grid[-1] < center + reach:
        raise GridOutOfRange(f"{name}-grid [{grid[0]}, {grid[-1]}] does not "
                             f"cover the reachable range {center} +- {reach}")


def _separable_lattice(cfg, start, step, keep_levels):
    e, eps, N = cfg.experts, cfg.eps, cfg.N
    c, phi_bar = cfg.final.c, cfg.final.phi_bar
    plus, minus = _transitions(e.d)
    shifts = np.rint(eps * e.spreads / step).astype(int)
    S = int(np.max(np.abs(shifts)))
    J = N * S
    grid = start.xi + step * np.arange(-J, J + 1)
    V = np.tile(phi_bar(grid), (e.state_count, 1))
    s = c * eps * e.drifts
    levels = {N: V} if keep_levels else {}
    for k in range(N - 1, -1, -1):
        lo, hi = J - k * S, J + k * S + 1
        idx = np.arange(lo, hi)
        new = np.full_like(V, np.nan)
        for m in range(e.state_count):
            new[m, lo:hi] = _crossing(V[plus[m], idx + shifts[m]],
                                      V[minus[m], idx - shifts[m]],
                                      s[m], c * eps)[0]
        V = new
        if keep_levels or k == 0:
            levels[k] = V
    if N == 0:
        levels[0] = V
    return GameValue(cfg, grid, levels, 'lattice', c, None, step, start)


def _separable_interpolated(cfg, start, grid, keep_levels):
    e, eps, N = cfg.experts, cfg.eps, cfg.N
    c, phi_bar = cfg.final.c, cfg.final.phi_bar
    plus, minus = _transitions(e.d)
    V = np.tile(phi_bar(grid), (e.state_count, 1))
    s = c * eps * e.drifts
    levels = {N: V} if keep_levels else {}
    for k in range(N - 1, -1, -1):
        curves = []
        for row in V:
            mask = np.isfinite(row)
            curves.append(PchipInterpolator(grid[mask], row[mask],
                                            extrapolate=False))
        new = np.empty_like(V)
        for m in range(e.state_count):
            dx = eps * e.spread(m)
            new[m] = _crossing(curves[plus[m]](grid + dx),
                               curves[minus[m]](grid - dx),
                               s[m], c * eps)[0]
        V = new
        if keep_levels or k == 0:
            levels[k] = V
        logger.debug(f"separable sweep: level {k} done")
    if N == 0:
        levels[0] = V
    return GameValue(cfg, grid, levels, 'interpolated', c, None, None, start)


def dpp_value_separable(cfg, start=None, xi_grid=None, keep_levels=False,
                        lattice=True):
    """Backward sweep for separable final data c eta + phi_bar(xi).

    When the xi increments eps (q(m) - r(m)) share a common step the sweep
    runs on that lattice without interpolation; otherwise (or when an explicit
    xi_grid is given) values between nodes come from monotone cubic
    interpolation.

    :param cfg: GameConfig with SeparableData (classic included)
    :param start: RegretPoint the grid is centered on
    :param xi_grid: optional explicit grid; must cover the reachable range
    :param keep_levels: keep every level, not only k = 0
    """
    if not isinstance(cfg.final, SeparableData):
        raise ValidationError("the separable sweep needs final data of the "
                              "form c eta + phi_bar(xi)")
    start = start or RegretPoint()
    e, eps, N = cfg.experts, cfg.eps, cfg.N
    reach = N * eps * float(np.max(np.abs(e.spreads)))
    if xi_grid is not None:
        grid = np.sort(np.asarray(xi_grid, dtype=float))
        _check_covers(grid, start.xi, reach, 'xi')
        value = _separable_interpolated(cfg, start, grid, keep_levels)
    else:
        step = lattice_step(eps * e.spreads) if lattice else None
        nodes = (2 * reach / step + 1) if step else np.inf
        if step and nodes * e.state_count <= config.max_lattice_nodes:
            value = _separable_lattice(cfg, start, step, keep_levels)
        else:
            h = eps ** 1.5
            grid = _centered_grid(start.xi,
                                  reach * (1 + config.grid_margin) + h, h)
            value = _separable_interpolated(cfg, start, grid, keep_levels)
    logger.info(f"separable value for N={N}, eps={cfg.epsilon} "
                f"({value.mode}, {value.xi_grid.size} nodes)")
    return value


def _cover(grid, center, radius):
    """Index range [lo, hi] of the smallest block of nodes strictly
    bracketing [center - radius, center + radius], clipped to the grid"""
    tol = 1e-9 * max(1.0, abs(center) + radius)
    lo = int(np.searchsorted(grid, center - radius - tol, side='left')) - 1
    hi = int(np.searchsorted(grid, center + radius + tol, side='right'))
    return max(lo, 0), min(hi, grid.size - 1)


def _hermite_rows(grid, values, slopes, y):
    """Cubic Hermite evaluation of row i of the tables at row i of y.
    Points up to one cell past either end use the end cubic."""
    j = np.clip(np.searchsorted(grid, y, side='right') - 1, 0, grid.size - 2)
    rows = np.arange(values.shape[0])[:, None]
    h = grid[j + 1] - grid[j]
    t = (y - grid[j]) / h
    t2, t3 = t * t, t * t * t
    return ((2 * t3 - 3 * t2 + 1) * values[rows, j]
            + (t3 - 2 * t2 + t) * h * slopes[rows, j]
            + (3 * t2 - 2 * t3) * values[rows, j + 1]
            + (t3 - t2) * h * slopes[rows, j + 1])


def _curvature_term(table, grid, axis):
    """Per-level interpolation error along one axis: h^2 max|u_zz| / 4,
    with u_zz taken from second differences of the table"""
    if grid.size < 3:
        return 0.0
    spacing = np.diff(grid)
    second = np.diff(table, 2, axis=axis) / np.min(spacing) ** 2
    return float(np.max(spacing)) ** 2 * float(np.max(np.abs(second))) / 4


def dpp_value_general(cfg, start=None, xi_grid=None, eta_grid=None,
                      keep_levels=False, threads=1):
    """Backward sweep on a (xi, eta) grid for any final data. The max over
    b is exact; the min over f is a golden-section search on [-1, 1].

    Between nodes the tables are read with monotone cubic (PCHIP)
    interpolation along eta, and along xi unless the xi increments share a
    common step, in which case xi moves are exact index shifts. Level k is
    computed on the block of nodes bracketing the region reachable in k
    steps from start.

    :param cfg: GameConfig
    :param start: RegretPoint the default grids are centered on
    :param xi_grid, eta_grid: optional explicit grids covering the
        reachable region
    :param threads: worker threads; states of one level run concurrently
    """
    start = start or RegretPoint()
    e, eps, N = cfg.experts, cfg.eps, cfg.N
    h = eps ** 1.5
    xi_step = eps * float(np.max(np.abs(e.spreads)))
    eta_step = eps * (float(np.max(np.abs(e.drifts))) + 2)
    step = None
    if xi_grid is None:
        step = lattice_step(eps * e.spreads)
        S = int(round(xi_step / step)) if step else 0
        if step and (2 * N * S + 3) * e.state_count \
                <= config.max_lattice_nodes ** 0.5:
            xi_grid = start.xi + step * np.arange(-N * S - 1, N * S + 2)
        else:
            step = None
            xi_grid = _centered_grid(
                start.xi, N * xi_step * (1 + config.grid_margin) + h, h)
    else:
        xi_grid = np.sort(np.asarray(xi_grid, dtype=float))
        _check_covers(xi_grid, start.xi, N * xi_step, 'xi')
    if eta_grid is None:
        eta_grid = _centered_grid(
            start.eta, N * eta_step * (1 + config.grid_margin) + h, h)
    else:
        eta_grid = np.sort(np.asarray(eta_grid, dtype=float))
        _check_covers(eta_grid, start.eta, N * eta_step, 'eta')
    if xi_grid.size < 2 or eta_grid.size < 2:
        raise ValidationError("the general sweep needs at least two nodes "
                              "along each axis")

    X, Y = np.meshgrid(xi_grid, eta_grid, indexing='ij')
    V = np.stack([cfg.final.value(X, Y)] * e.state_count)
    bound = N * (_curvature_term(V[0], eta_grid, 1)
                 + (0.0 if step is not None
                    else _curvature_term(V[0], xi_grid, 0)))
    if step is not None:
        shifts = np.rint(eps * e.spreads / step).astype(int)
    plus, minus = _transitions(e.d)
    levels = {N: V} if keep_levels else {}
    outer = (_cover(xi_grid, start.xi, N * xi_step),
             _cover(eta_grid, start.eta, N * eta_step))
    for k in range(N - 1, -1, -1):
        (a1, b1), (c1, d1) = outer
        (a0, b0), (c0, d0) = outer = (_cover(xi_grid, start.xi, k * xi_step),
                                      _cover(eta_grid, start.eta,
                                             k * eta_step))
        xs, ys = xi_grid[a0:b0 + 1], eta_grid[c1:d1 + 1]
        Y0 = np.broadcast_to(eta_grid[c0:d0 + 1], (xs.size, d0 - c0 + 1))
        tables = V[:, a1:b1 + 1, c1:d1 + 1]

        def branch(p, m, sign):
            if step is not None:
                lo = a0 - a1 + sign * shifts[m]
                rows = tables[p][lo:lo + xs.size]
            else:
                rows = PchipInterpolator(xi_grid[a1:b1 + 1], tables[p],
                                         axis=0)(xs + sign * eps * e.spread(m))
            slopes = PchipInterpolator(ys, rows, axis=1).derivative()(ys)
            return rows, slopes

        def level(m):
            up, down = branch(plus[m], m, 1), branch(minus[m], m, -1)

            def F(f):
                shift = eps * (e.drift(m) - 2 * f)
                return np.maximum(_hermite_rows(ys, *up, Y0 + shift),
                                  _hermite_rows(ys, *down, Y0 - shift))

            return golden_section_min(F, Y0.shape)[0]

        V = np.full_like(V, np.nan)
        V[:, a0:b0 + 1, c0:d0 + 1] = np.stack(
            parallel_map(level, range(e.state_count), threads))
        if keep_levels or k == 0:
            levels[k] = V
        logger.debug(f"general sweep: level {k} done on a "
                     f"{xs.size}x{d0 - c0 + 1} block")
    if N == 0:
        levels[0] = V
    logger.info(f"general value for N={N}, eps={cfg.epsilon} on a "
                f"{xi_grid.size}x{eta_grid.size} grid"
                f"{' (xi lattice)' if step is not None else ''}")
    return GameValue(cfg, xi_grid, levels, 'general', None, eta_grid, step,
                     start, bound)


def optimal_play(value, m=0, start=None):
    """Replay the minimax path from a value table with every level kept.
    The market breaks ties with b = +1.

    :param value: GameValue computed with keep_levels=True
    :param m: starting state
    :param start: starting RegretPoint (defaults to the table's center)
    """
    cfg = value.cfg
    e, eps = cfg.experts, cfg.eps
    point = start or value.start
    xi, eta = point.xi, point.eta
    plus, minus = _transitions(e.d)
    steps = []
    for k in range(cfg.N):
        dx = eps * e.spread(m)
        if value.eta_grid is None:
            c = value.slope
            a_plus = value.at(k + 1, plus[m], xi + dx)
            a_minus = value.at(k + 1, minus[m], xi - dx)
            s = c * eps * e.drift(m)
            _, f = _crossing(a_plus, a_minus, s, c * eps)
            f = float(f)
            up = a_plus + s - 2 * c * eps * f
            down = a_minus - s + 2 * c * eps * f
        else:
            def branches(f):
                shift = eps * (e.drift(m) - 2 * f)
                return (value.at(k + 1, plus[m], xi + dx, eta + shift),
                        value.at(k + 1, minus[m], xi - dx, eta - shift))

            res = minimize_scalar(lambda f: max(branches(f)),
                                  bounds=(-1.0, 1.0), method='bounded',
                                  options={'xatol': config.golden_section_tol})
            f = min((float(res.x), -1.0, 1.0), key=lambda g: max(branches(g)))
            up, down = branches(f)
        b = 1 if up >= down else -1
        steps.append(Step(k, cfg.time(k), m, xi, eta, f, b, False))
        m, xi, eta = advance(e, eps, m, xi, eta, f, b)
    final = RegretPoint(xi, eta)
    return OptimalPlay(steps, m, final, float(cfg.final.value(xi, eta)))
